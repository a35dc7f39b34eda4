"""Independent oracles and identity checks.

The football oracle lists equivariant section monomials on an orbifold
projective line directly; it never calls the product formulas it is used
to check.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import MPoly, QSeries, RatFunc, pole_order, residue_z
from .errors import InternalInvariantViolation, InvalidDegree, InvalidEdge
from .graphs import (
    DecoratedTree,
    Insertion,
    edge_contribution,
    evaluate_fully_unstable_tree,
    in_E,
    recursion_coeff,
    stable_edge_factor,
    unstable_edge_factor,
)
from .jfunctions import f_unstable_coeff, unstable_coeff_eq, unstable_coeff_noneq
from .state_space import EqStateClass, ModelParams, frac, noneq_limit


@dataclass
class Verdict:
    name: str
    ok: bool
    checked: int = 0
    witness: dict | None = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"name": self.name, "ok": self.ok, "checked": self.checked}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.details:
            out["details"] = self.details
        return out


# --------------------------------------------------------------------------
# football cohomology
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FootballBundle:
    """Line bundle on an orbifold P^1 with Z_d isotropy at 0 and infinity.

    ``fiber_weight_at_infty`` is the weight of the coarse bundle at infinity
    and ``tangent_weight_at_0`` the weight of the coarse tangent line at 0.
    """

    coarse_degree: int
    mult_at_0: Fraction
    mult_at_infty: Fraction
    fiber_weight_at_infty: MPoly
    tangent_weight_at_0: MPoly

    @property
    def orbifold_degree(self) -> Fraction:
        return self.coarse_degree + self.mult_at_0 + self.mult_at_infty


def football_weights(b: FootballBundle) -> tuple[list[MPoly], list[MPoly]]:
    """Torus weights of H^0 and H^1 from Cech monomials ``x0^k x1^(n-k)``.

    A monomial with ``0 <= k <= n`` is a global section; one with negative
    exponents on both coordinates (``1 <= k <= -n-1``, written with
    ``x0^-k``) spans H^1.  Exponent k of x0 carries weight ``k * tau``
    relative to the fiber at infinity.
    """
    n, fw, tau = b.coarse_degree, b.fiber_weight_at_infty, b.tangent_weight_at_0
    h0 = [fw + tau.scale(k) for k in range(0, n + 1)]
    h1 = [fw - tau.scale(k) for k in range(1, -n)]
    chi = len(h0) - len(h1)
    if chi != n + 1:
        raise InternalInvariantViolation("Riemann-Roch failed on the football")
    return h0, h1


def serre_dual_h1(b: FootballBundle) -> list[MPoly]:
    """H^1 weights via duality: negatives of H^0 weights of ``L^vee (x) omega``."""
    tau = b.tangent_weight_at_0
    dual = FootballBundle(
        -b.coarse_degree - 2, Fraction(0), Fraction(0), -b.fiber_weight_at_infty + tau, tau
    )
    h0, _ = football_weights(dual)
    return [-w for w in h0]


def _tau(jv, jw, beta_e, p) -> MPoly:
    return (p.a(jv) - p.a(jw)).scale(Fraction(1, beta_e))


def edge_bundles(jv, jw, beta_e, m, p, twisted=False, beta_v=None):
    """Footballs for the bundles ``L^{w_i}`` and ``L^{-d} omega_log (x) C_{-a_k}`` on an edge.

    The end at 0 is the vertex v.  ``beta_v`` marks v as an unstable
    valence-one vertex (a smooth point carrying a basepoint of that order);
    otherwise both ends are nodes.  ``twisted`` twists down at node ends.
    """
    tau = _tau(jv, jw, beta_e, p)
    m = frac(m)
    m2 = frac(Fraction(beta_e, p.degree) - m)
    bare = beta_v is not None
    extra = (beta_v + 1) if bare else 0
    wbundles = []
    for w in p.weights:
        D = Fraction(-w * (beta_e + extra), p.degree)
        mu0 = Fraction(0) if bare else frac(-w * m)
        mu_inf = frac(-w * m2)
        n = D - mu0 - mu_inf
        if n.denominator != 1:
            raise InternalInvariantViolation("non-integral coarse degree")
        n = int(n)
        fw = p.a(jw).scale(Fraction(-w, p.degree)) + tau.scale(mu_inf)
        if twisted:
            if not bare and mu0 == 0:
                n -= 1
            if mu_inf == 0:
                n -= 1
                fw = fw + tau
        wbundles.append(FootballBundle(n, mu0, mu_inf, fw, tau))
    sbundles = []
    for k in range(1, p.num_polys + 1):
        deg = beta_e + (beta_v or 0)
        fw = p.a(jw) - p.a(k)
        sbundles.append(FootballBundle(deg, Fraction(0), Fraction(0), fw, tau))
    return wbundles, sbundles


def oracle_edge_ratio(jv, jw, beta_e, m, p, twisted=False, beta_v=None) -> RatFunc:
    """``e(H^1(+ L^{w_i})) / e(H^0(+ L^{-d} omega_log)^mov)`` from football weights."""
    wb, sb = edge_bundles(jv, jw, beta_e, m, p, twisted, beta_v)
    numer, denom = [], []
    for b in wb:
        h0, h1 = football_weights(b)
        if h0:
            raise InternalInvariantViolation("unexpected sections of L^{w_i} on an edge")
        numer.extend(h1)
    for b in sb:
        h0, h1 = football_weights(b)
        if h1:
            raise InternalInvariantViolation("unexpected H^1 of L^{-d} omega_log")
        denom.extend(w for w in h0 if w.terms)
    return RatFunc.product(p.nvars, 1, numer, denom)


def check_edge_formula(jv, jw, beta_e, m, p: ModelParams, beta_v=None) -> Verdict:
    """Compare football Euler-class ratios with the edge product formulas.

    Stable edges: the untwisted ratio must equal the strict-range formula and
    the node-twisted ratio divided by ``d beta_e`` the non-strict one.  With
    ``beta_v`` set, the ratio for an edge ending in an unstable valence-one
    vertex must equal the unstable-edge formula.
    """
    name = f"edge j=({jv},{jw}) beta_e={beta_e} m={frac(m)}" + (f" beta_v={beta_v}" if beta_v is not None else "")
    if jv == jw:
        raise InvalidEdge("an edge must join distinct fixed points")
    pairs = []
    if beta_v is None:
        pairs.append(("untwisted/strict", oracle_edge_ratio(jv, jw, beta_e, m, p), stable_edge_factor(jv, jw, beta_e, m, p)))
        twisted = oracle_edge_ratio(jv, jw, beta_e, m, p, twisted=True) * Fraction(1, p.degree * beta_e)
        pairs.append(("twisted/non-strict", twisted, edge_contribution(jv, jw, beta_e, m, p)))
    else:
        pairs.append(
            (
                "unstable end",
                oracle_edge_ratio(jv, jw, beta_e, m, p, beta_v=beta_v),
                unstable_edge_factor(jv, jw, beta_e, beta_v, m, p),
            )
        )
    for label, oracle, formula in pairs:
        if oracle != formula:
            return Verdict(
                name, False, len(pairs),
                {"case": label, "oracle": oracle.canonical_str(), "formula": formula.canonical_str()},
            )
    return Verdict(name, True, len(pairs))


def check_all_edges(p: ModelParams, max_beta_e: int = 6, max_beta_v: int = 4) -> Verdict:
    """Every ordered fixed-point pair, edge degree and flag multiplicity."""
    count = 0
    for jv in range(1, p.num_polys + 1):
        for jw in range(1, p.num_polys + 1):
            if jv == jw:
                continue
            for be in range(1, max_beta_e + 1):
                for m in p.sectors():
                    v = check_edge_formula(jv, jw, be, m, p)
                    count += v.checked
                    if not v.ok:
                        return Verdict("edges", False, count, {"edge": v.name, **v.witness})
                for bv in range(0, max_beta_v + 1):
                    m = frac(Fraction(-(bv + 1), p.degree))
                    v = check_edge_formula(jv, jw, be, m, p, beta_v=bv)
                    count += v.checked
                    if not v.ok:
                        return Verdict("edges", False, count, {"edge": v.name, **v.witness})
    return Verdict("edges", True, count)


# --------------------------------------------------------------------------
# residue recursion
# --------------------------------------------------------------------------


@dataclass
class ResidueReport:
    pole: tuple
    lhs: QSeries
    rhs: QSeries
    modulus: int
    verdict: str
    witness: dict | None = None
    boundary: tuple = ()
    cone_membership: str = "not-checked"

    @property
    def ok(self) -> bool:
        return self.verdict == "exact-equal"

    def to_json(self, p: ModelParams) -> dict:
        j, j2, be = self.pole
        out = {
            "pole": {"j": j, "j_prime": j2, "beta_e": be},
            "modulus": self.modulus,
            "verdict": self.verdict,
            "boundary_degrees": list(self.boundary),
            "cone_membership": self.cone_membership,
            "lhs": {str(b): c.canonical_str() for b, c in self.lhs.items()},
            "rhs": {str(b): c.canonical_str() for b, c in self.rhs.items()},
        }
        if self.witness:
            out["witness"] = self.witness
        return out


def boundary_graph(j, j2, m, beta, beta_e, p: ModelParams) -> DecoratedTree | None:
    """Two-vertex graph: mark on an unstable vertex at P_j, edge of degree beta_e,
    unstable valence-one vertex at P_j2 of degree ``beta - beta_e``."""
    tree = DecoratedTree.build((j, j2), (0, beta - beta_e), ((0, 1, beta_e),), (0,), (-frac(m),), p, validate=False)
    return tree if tree.is_valid() else None


def boundary_residue(j, j2, m, m2, beta, beta_e, p: ModelParams) -> RatFunc:
    """Residue at the pole of the graph contributions in the boundary range."""
    n = p.nvars
    tree = boundary_graph(j, j2, m, beta, beta_e, p)
    if tree is None or tree.flags[(1, 0)] != frac(m2):
        return RatFunc.zero(n)
    value = evaluate_fully_unstable_tree(tree, [Insertion(descendant=True)], p)
    return residue_z(value, _tau(j, j2, beta_e, p))


def check_residue_recursion(
    j, j2, m, m2, beta_e, p: ModelParams, D: int, rc_scale=1, include_boundary: bool = True
) -> ResidueReport:
    """Residue of ``f_{j,m}`` at ``z = (a_j - a_j')/beta_e`` against the recursion."""
    if j == j2:
        raise InvalidEdge("the recursion needs two distinct fixed points")
    m, m2 = frac(m), frac(m2)
    if not in_E(beta_e, m, m2, p.degree):
        raise InvalidDegree(f"beta_e = {beta_e} is not in E^({m},{m2})")
    eps = p.epsilon
    if eps.kind == "inf":
        raise ValueError("the residue recursion needs epsilon = 0+ or a finite epsilon")
    n = p.nvars
    c = _tau(j, j2, beta_e, p)
    top = eps.max_unstable
    modulus = D if top is None else min(D, top + (beta_e if include_boundary else 0))
    rc = recursion_coeff(m, m2, j, j2, beta_e, p) * rc_scale
    lhs, rhs, boundary = {}, {}, []
    for beta in range(modulus + 1):
        if eps.is_unstable(beta):
            f = f_unstable_coeff(beta, j, m, p)
            if pole_order(f, c) > 1:
                raise InternalInvariantViolation(f"pole of order > 1 at beta = {beta}")
            lhs[beta] = residue_z(f, c)
        else:
            boundary.append(beta)
            lhs[beta] = boundary_residue(j, j2, m, m2, beta, beta_e, p)
        bv = beta - beta_e
        if bv >= 0 and eps.is_unstable(bv):
            g = f_unstable_coeff(bv, j2, -m2, p).subs({0: c})
            rhs[beta] = -(rc * g)
    lhs_s, rhs_s = QSeries(modulus, lhs), QSeries(modulus, rhs)
    report = ResidueReport((j, j2, beta_e), lhs_s, rhs_s, modulus, "exact-equal", boundary=tuple(boundary))
    for beta in range(modulus + 1):
        left = lhs.get(beta, RatFunc.zero(n))
        right = rhs.get(beta, RatFunc.zero(n))
        if left != right:
            report.verdict = "mismatch"
            report.witness = {
                "beta": beta,
                "sector": str(m),
                "lhs": left.canonical_str(),
                "rhs": right.canonical_str(),
            }
            break
    return report


def residue_cases(p: ModelParams, max_beta_e: int):
    """All ``(j, j', m, m', beta_e)`` with ``beta_e`` in ``E^{m,m'}``."""
    for j in range(1, p.num_polys + 1):
        for j2 in range(1, p.num_polys + 1):
            if j == j2:
                continue
            for m in p.sectors():
                for m2 in p.sectors():
                    for be in range(1, max_beta_e + 1):
                        if in_E(be, m, m2, p.degree):
                            yield j, j2, m, m2, be


# --------------------------------------------------------------------------
# pole audit
# --------------------------------------------------------------------------


def audit_poles(f: RatFunc, j: int, p: ModelParams) -> dict | None:
    """Return a witness if some z-pole of f is not 0 or ``(a_j - a_k)/b``."""
    n = p.nvars
    z = MPoly.var(n, 0)
    for g, mult in f.factors.items():
        if not g.depends_on(0):
            continue
        if g.total_degree() != 1 or g.degree(0) != 1:
            return {"factor": g.to_str(), "reason": "not linear in z"}
        root = z - g
        if not root.terms:
            continue
        if mult != 1:
            return {"factor": g.to_str(), "reason": f"pole of order {mult}"}
        if not _admissible_root(root, j, p):
            return {"factor": g.to_str(), "reason": "pole not of the form (a_j - a_k)/b"}
    return None


def _admissible_root(root: MPoly, j: int, p: ModelParams) -> bool:
    for k in range(1, p.num_polys + 1):
        if k == j:
            continue
        diff = p.a(j) - p.a(k)
        e = [0] * p.nvars
        e[j] = 1
        cj = root.terms.get(tuple(e))
        if cj is None or cj <= 0:
            continue
        b = 1 / Fraction(cj)
        if b.denominator == 1 and root == diff.scale(cj):
            return True
    return False


def check_pole_structure(j: int, m, p: ModelParams, D: int) -> Verdict:
    top = p.epsilon.max_unstable
    last = D if top is None else min(D, top)
    checked = 0
    for beta in range(last + 1):
        f = f_unstable_coeff(beta, j, m, p)
        if f.is_zero():
            continue
        checked += 1
        w = audit_poles(f, j, p)
        if w is not None:
            return Verdict(f"poles j={j} m={frac(m)}", False, checked, {"beta": beta, **w})
    return Verdict(f"poles j={j} m={frac(m)}", True, checked)


# --------------------------------------------------------------------------
# non-equivariant limit
# --------------------------------------------------------------------------


def check_noneq_consistency(p: ModelParams, D: int) -> Verdict:
    top = p.epsilon.max_unstable
    last = D if top is None else min(D, top)
    for beta in range(last + 1):
        total = EqStateClass(p)
        for j in range(1, p.num_polys + 1):
            total = total + unstable_coeff_eq(beta, j, p)
        lim = noneq_limit(total, p)
        direct = unstable_coeff_noneq(beta, p)
        if lim != direct:
            return Verdict(
                "noneq-limit", False, beta + 1,
                {"beta": beta, "limit": lim.to_records(), "direct": direct.to_records()},
            )
    return Verdict("noneq-limit", True, last + 1)

"""Decorated localization trees and their contribution factors.

A tree is stored rooted at the vertex carrying the first marked point.
Flag multiplicities are not free data: cutting an edge splits the tree in
two, and the vertex selection rules on one side fix the multiplicity of the
flag on that side.  They are therefore computed from the degrees and the
mark sectors when a tree is built.
"""
from __future__ import annotations

import enum
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import MPoly, RatFunc
from .errors import ContainsStableVertex, InternalInvariantViolation, InvalidDegree, InvalidEdge
from .jfunctions import progression, unstable_value_eq
from .state_space import ModelParams, eta, frac


class VertexKind(enum.Enum):
    STABLE = "stable"
    UNSTABLE_VAL1 = "unstable-val1"
    UNSTABLE_VAL2_NODE = "unstable-val2-node"
    UNSTABLE_VAL2_MARK = "unstable-val2-mark"


# --------------------------------------------------------------------------
# raw product formulas (edge data given explicitly)
# --------------------------------------------------------------------------


def _diff(p: ModelParams, j: int, k: int) -> MPoly:
    return p.a(j) - p.a(k)


def _edge_numerator(p, jv, jw, beta_e, m, lo, lo_strict, hi_strict, hi_of=None):
    """Factors ``(b/beta_e)(a_jv - a_jw) - (w_i/d) a_jv`` over the b-progression."""
    out = []
    delta = _diff(p, jv, jw)
    for w in p.weights:
        hi = Fraction(beta_e * w, p.degree)
        low = lo(w) if callable(lo) else lo
        for b in progression(w * Fraction(m), low, hi, lo_strict, hi_strict):
            out.append(delta.scale(b / beta_e) - p.a(jv).scale(Fraction(w, p.degree)))
    return out


def _edge_denominator(p, jv, jw, beta_e, b_lo=0):
    """Nonzero factors ``(b/beta_e)(a_jw - a_jv) + a_jv - a_k`` for integers b_lo <= b <= beta_e."""
    out = []
    delta = _diff(p, jw, jv)
    for k in range(1, p.num_polys + 1):
        base = _diff(p, jv, k)
        for b in range(b_lo, beta_e + 1):
            f = delta.scale(Fraction(b, beta_e)) + base
            if f:
                out.append(f)
    return out


def _check_edge(jv, jw, p):
    if jv == jw:
        raise InvalidEdge("an edge must join distinct fixed points")
    if not (1 <= jv <= p.num_polys and 1 <= jw <= p.num_polys):
        raise InvalidEdge("fixed point out of range")


def in_E(beta: int, m, m2, d: int) -> bool:
    """``beta`` lies in ``E^{m,m'}``."""
    return beta > 0 and (Fraction(beta, d) - Fraction(m) - Fraction(m2)).denominator == 1


def edge_contribution(jv, jw, beta_e, m, p: ModelParams) -> RatFunc:
    """Total edge contribution (node-twisted, including ``1/(d beta_e)``)."""
    _check_edge(jv, jw, p)
    numer = _edge_numerator(p, jv, jw, beta_e, m, 0, False, False)
    denom = _edge_denominator(p, jv, jw, beta_e)
    return RatFunc.product(p.nvars, Fraction(1, p.degree * beta_e), numer, denom)


def stable_edge_factor(jv, jw, beta_e, m, p: ModelParams) -> RatFunc:
    """Euler-class ratio for the untwisted edge bundle (strict b-range)."""
    _check_edge(jv, jw, p)
    numer = _edge_numerator(p, jv, jw, beta_e, m, 0, True, True)
    denom = _edge_denominator(p, jv, jw, beta_e)
    return RatFunc.product(p.nvars, 1, numer, denom)


def unstable_edge_factor(jv, jw, beta_e, beta_v, m, p: ModelParams) -> RatFunc:
    """Euler-class ratio for an edge whose end v is an unstable valence-one vertex."""
    _check_edge(jv, jw, p)
    numer = _edge_numerator(
        p, jv, jw, beta_e, m, lambda w: Fraction(-(beta_v + 1) * w, p.degree), True, True
    )
    denom = _edge_denominator(p, jv, jw, beta_e, b_lo=-beta_v)
    return RatFunc.product(p.nvars, 1, numer, denom)


def unstable_vertex_contribution(jv, jw, beta_e, beta_v, m, p: ModelParams) -> RatFunc:
    """Valence-one unstable vertex v of degree beta_v on an edge to ``P_jw``."""
    _check_edge(jv, jw, p)
    n = p.nvars
    numer = [_diff(p, jv, jw)]
    delta = _diff(p, jw, jv)
    for w in p.weights:
        top = Fraction(w * (beta_v + 1), p.degree)
        for b in progression(-w * Fraction(m), 0, top, True, True):
            numer.append(delta.scale(b / beta_e) - p.a(jv).scale(Fraction(w, p.degree)))
    denom = []
    for k in range(1, p.num_polys + 1):
        base = _diff(p, jv, k)
        for b in range(1, beta_v + 1):
            f = delta.scale(Fraction(-b, beta_e)) + base
            if f:
                denom.append(f)
    return eta(jv, m, p) * RatFunc.product(n, Fraction(1, beta_e), numer, denom)


def recursion_coeff(m, m2, j, j2, beta: int, p: ModelParams) -> RatFunc:
    """Recursion coefficient ``RC^{m,m'}_{j,j'}(beta)``."""
    _check_edge(j, j2, p)
    if not in_E(beta, m, m2, p.degree):
        raise InvalidDegree(f"beta = {beta} is not in E^({m},{m2})")
    numer = []
    delta = _diff(p, j, j2)
    for w in p.weights:
        hi = Fraction(beta * w, p.degree)
        for b in progression(w * Fraction(m), 0, hi, False, True):
            numer.append(delta.scale(b / beta) - p.a(j).scale(Fraction(w, p.degree)))
    denom = []
    back = _diff(p, j2, j)
    for k in range(1, p.num_polys + 1):
        base = _diff(p, j, k)
        for b in range(0, beta):
            f = back.scale(Fraction(b, beta)) + base
            if f:
                denom.append(f)
    return RatFunc.product(p.nvars, Fraction(1, beta), numer, denom)


# --------------------------------------------------------------------------
# trees
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DecoratedTree:
    """Vertices ``(j_v, beta_v)``, edges ``(parent, child, beta_e)`` and marks.

    ``marks[k]`` is the vertex carrying mark ``k + 1`` and
    ``mark_sectors[k]`` the sector of its insertion.  ``flags`` maps
    ``(vertex, edge index)`` to the flag multiplicity.
    """

    js: tuple[int, ...]
    betas: tuple[int, ...]
    edges: tuple[tuple[int, int, int], ...]
    marks: tuple[int, ...]
    mark_sectors: tuple[Fraction, ...]
    degree: int = field(compare=False)
    flags: Mapping = field(compare=False, hash=False, repr=False)

    # -- construction ---------------------------------------------------

    @classmethod
    def build(cls, js, betas, edges, marks, mark_sectors, p: ModelParams, validate=True):
        js, betas = tuple(js), tuple(betas)
        edges = tuple((int(u), int(v), int(b)) for u, v, b in edges)
        marks = tuple(marks)
        mark_sectors = tuple(frac(m) for m in mark_sectors)
        flags = _compute_flags(js, betas, edges, marks, mark_sectors, p.degree)
        tree = cls(js, betas, edges, marks, mark_sectors, p.degree, flags)
        if validate:
            problems = tree.violations()
            if problems:
                raise ValueError("; ".join(problems))
        return tree

    # -- basic structure -----------------------------------------------

    @property
    def num_vertices(self) -> int:
        return len(self.js)

    @property
    def total_degree(self) -> int:
        return sum(self.betas) + sum(b for _, _, b in self.edges)

    def incident(self, v: int) -> list[int]:
        return [i for i, (a, b, _) in enumerate(self.edges) if v in (a, b)]

    def other_end(self, e: int, v: int) -> int:
        a, b, _ = self.edges[e]
        return b if v == a else a

    def marks_at(self, v: int) -> list[int]:
        return [k for k, w in enumerate(self.marks) if w == v]

    def valence(self, v: int) -> int:
        return len(self.incident(v)) + len(self.marks_at(v))

    def kind(self, v: int, p: ModelParams) -> VertexKind | None:
        val = self.valence(v)
        ne = len(self.incident(v))
        if val >= 3:
            return VertexKind.STABLE
        if val == 2:
            if self.betas[v] >= 1:
                return VertexKind.STABLE
            if ne == 2:
                return VertexKind.UNSTABLE_VAL2_NODE
            if ne == 1:
                return VertexKind.UNSTABLE_VAL2_MARK
            return None
        if val == 1:
            if p.epsilon.is_unstable(self.betas[v]):
                return VertexKind.UNSTABLE_VAL1
            return VertexKind.STABLE
        return None

    def kinds(self, p: ModelParams) -> list[VertexKind | None]:
        return [self.kind(v, p) for v in range(self.num_vertices)]

    # -- validity -------------------------------------------------------

    def violations(self) -> list[str]:
        """Independent re-check of every combinatorial rule."""
        out = []
        V, d = self.num_vertices, self.degree
        if len(self.edges) != V - 1:
            out.append("edge count is not V - 1")
        parent = list(range(V))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b, be in self.edges:
            if be < 1:
                out.append(f"edge degree {be} < 1")
            if self.js[a] == self.js[b]:
                out.append(f"edge {a}-{b} joins equal fixed points")
            ra, rb = find(a), find(b)
            if ra == rb:
                out.append("graph has a cycle")
            parent[ra] = rb
        if any(b < 0 for b in self.betas):
            out.append("negative vertex degree")
        if not self.marks:
            out.append("a tree needs at least one mark")
        for e, (a, b, be) in enumerate(self.edges):
            if not in_E(be, self.flags[(a, e)], self.flags[(b, e)], d):
                out.append(f"edge {e} violates the degree rule")
        for v in range(V):
            total = Fraction(-self.betas[v] + self.valence(v) - 2, d)
            total -= sum(self.flags[(v, e)] for e in self.incident(v))
            total -= sum(self.mark_sectors[k] for k in self.marks_at(v))
            if total.denominator != 1:
                out.append(f"vertex {v} violates the selection rule")
        return out

    def is_valid(self) -> bool:
        return not self.violations()

    # -- canonical form and automorphisms ------------------------------

    def _children(self, v, parent):
        return [(e, self.other_end(e, v)) for e in self.incident(v) if self.other_end(e, v) != parent]

    def _code(self, v, parent):
        kids = sorted((self.edges[e][2], self._code(w, v)) for e, w in self._children(v, parent))
        here = tuple(sorted((k + 1, self.mark_sectors[k]) for k in self.marks_at(v)))
        return (self.js[v], self.betas[v], here, tuple(kids))

    def root(self) -> int:
        return self.marks[0]

    def canonical_code(self):
        return self._code(self.root(), None)

    def canonical(self, p: ModelParams) -> "DecoratedTree":
        """Relabel vertices in canonical depth-first order from the root."""
        order, edges = [], []

        def visit(v, parent):
            idx = len(order)
            order.append(v)
            kids = sorted(
                self._children(v, parent), key=lambda ew: (self.edges[ew[0]][2], self._code(ew[1], v))
            )
            for e, w in kids:
                child_idx = len(order)
                edges.append((idx, child_idx, self.edges[e][2]))
                visit(w, v)

        visit(self.root(), None)
        new = {old: i for i, old in enumerate(order)}
        return DecoratedTree.build(
            [self.js[v] for v in order],
            [self.betas[v] for v in order],
            edges,
            [new[v] for v in self.marks],
            self.mark_sectors,
            p,
            validate=False,
        )

    def aut_order(self) -> int:
        """Order of the group of decoration- and mark-preserving automorphisms."""

        def count(v, parent):
            kids = [(self.edges[e][2], self._code(w, v), w) for e, w in self._children(v, parent)]
            total = 1
            for _, mult in Counter((b, c) for b, c, _ in kids).items():
                total *= math.factorial(mult)
            for _, _, w in kids:
                total *= count(w, v)
            return total

        return count(self.root(), None)

    def __hash__(self):
        return hash(self.canonical_code())

    # -- output -----------------------------------------------------------

    def to_json(self, p: ModelParams) -> dict:
        d = p.degree
        return {
            "vertices": [{"j": j, "beta": b} for j, b in zip(self.js, self.betas)],
            "edges": [{"ends": [a, b], "beta": be} for a, b, be in self.edges],
            "flags": [
                {"vertex": v, "edge": e, "sector": int(m * d)} for (v, e), m in sorted(self.flags.items())
            ],
            "marks": [{"mark": k + 1, "vertex": v, "sector": int(self.mark_sectors[k] * d)} for k, v in enumerate(self.marks)],
            "aut_order": self.aut_order(),
            "kind_tags": [k.value if k else "invalid" for k in self.kinds(p)],
        }

    def to_dot(self, p: ModelParams, name: str = "tree") -> str:
        lines = [f"graph {name} {{"]
        for v, (j, b) in enumerate(zip(self.js, self.betas)):
            marks = ",".join(str(k + 1) for k in self.marks_at(v))
            label = f"j={j}\\nβ={b}" + (f"\\nmarks {marks}" if marks else "")
            kind = self.kind(v, p)
            shape = "box" if kind == VertexKind.STABLE else "ellipse"
            lines.append(f'  v{v} [label="{label}", shape={shape}];')
        for e, (a, b, be) in enumerate(self.edges):
            lines.append(f'  v{a} -- v{b} [label="{be}"];')
        lines.append("}")
        return "\n".join(lines)


def _compute_flags(js, betas, edges, marks, mark_sectors, d) -> dict:
    V = len(js)
    adj = {v: [] for v in range(V)}
    for e, (a, b, _) in enumerate(edges):
        adj[a].append((e, b))
        adj[b].append((e, a))
    val = [len(adj[v]) + sum(1 for w in marks if w == v) for v in range(V)]
    here = [Fraction(-betas[v] + val[v] - 2, d) - sum(mark_sectors[k] for k, w in enumerate(marks) if w == v) for v in range(V)]
    flags = {}
    root = marks[0] if marks else 0

    def side(v, parent):
        """Sum of local terms minus internal edge degrees over the subtree at v."""
        total = here[v]
        for e, w in adj[v]:
            if w == parent:
                continue
            sub = side(w, v)
            be = Fraction(edges[e][2], d)
            flags[(w, e)] = frac(sub)
            flags[(v, e)] = frac(be - sub)
            total += sub - be
        return total

    if V:
        side(root, None)
    return flags


# --------------------------------------------------------------------------
# enumeration
# --------------------------------------------------------------------------


def _rooted_shapes(V: int) -> list[tuple[int, ...]]:
    """Parent arrays (``parent[i] < i``) of pairwise non-isomorphic rooted trees."""
    if V == 1:
        return [()]
    seen = {}

    def code(children, v):
        return tuple(sorted(code(children, w) for w in children[v]))

    for parents in itertools.product(*[range(i) for i in range(1, V)]):
        children = {v: [] for v in range(V)}
        for i, par in enumerate(parents, start=1):
            children[par].append(i)
        c = code(children, 0)
        if c not in seen:
            seen[c] = parents
    return list(seen.values())


def _j_assignments(parents, N):
    V = len(parents) + 1
    for root_j in range(1, N + 1):
        js = [root_j] + [0] * (V - 1)

        def rec(i):
            if i == V:
                yield tuple(js)
                return
            for j in range(1, N + 1):
                if j != js[parents[i - 1]]:
                    js[i] = j
                    yield from rec(i + 1)

        yield from rec(1)


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def is_ample(tree: DecoratedTree, p: ModelParams) -> bool:
    """Edge components ending in an unstable valence-one vertex need degree above 1/epsilon."""
    for e, (a, b, be) in enumerate(tree.edges):
        bare = [v for v in (a, b) if tree.kind(v, p) == VertexKind.UNSTABLE_VAL1]
        if len(bare) == 2:
            return False
        if bare and p.epsilon.is_unstable(be + tree.betas[bare[0]]):
            return False
    return True


def enumerate_trees(
    n: int,
    beta: int,
    p: ModelParams,
    max_vertices: int,
    mark_sectors: Sequence | None = None,
    require_ample: bool = False,
) -> list[DecoratedTree]:
    """All isomorphism classes of valid decorated trees of total degree beta.

    With ``mark_sectors=None`` every assignment of insertion sectors is
    allowed (the first is then solved from the root selection rule).
    """
    if n < 1:
        raise ValueError("at least one mark is required")
    if mark_sectors is not None and len(mark_sectors) != n:
        raise ValueError("need one sector per mark")
    N, d = p.num_polys, p.degree
    found: dict = {}
    for V in range(1, max_vertices + 1):
        E = V - 1
        if E > beta or (E and N < 2):
            break
        for parents in _rooted_shapes(V):
            edge_ends = [(par, i) for i, par in enumerate(parents, start=1)]
            for js in _j_assignments(parents, N):
                for comp in _compositions(beta - E, V + E):
                    betas = comp[:V]
                    edges = [(a, b, 1 + x) for (a, b), x in zip(edge_ends, comp[V:])]
                    for others in itertools.product(range(V), repeat=n - 1):
                        marks = (0,) + others
                        for sectors in _sector_choices(js, betas, edges, marks, mark_sectors, n, d):
                            tree = DecoratedTree.build(js, betas, edges, marks, sectors, p, validate=False)
                            if not tree.is_valid():
                                continue
                            if any(k is None for k in tree.kinds(p)):
                                continue
                            if require_ample and not is_ample(tree, p):
                                continue
                            key = tree.canonical_code()
                            if key not in found:
                                found[key] = tree.canonical(p)
    return [found[k] for k in sorted(found, key=_sort_key)]


def _sort_key(code):
    return repr(code)


def _sector_choices(js, betas, edges, marks, given, n, d):
    if given is not None:
        yield tuple(frac(m) for m in given)
        return
    for rest in itertools.product(range(d), repeat=n - 1):
        others = tuple(Fraction(a, d) for a in rest)
        # solve the first sector from the global rule (sum of all vertex rules)
        V = len(js)
        total = Fraction(sum(-b for b in betas) + 2 * len(edges) + n - 2 * V, d)
        total -= sum(Fraction(be, d) for _, _, be in edges)
        total -= sum(others)
        yield (frac(total),) + others


def brute_force_aut(tree: DecoratedTree) -> int:
    """Count automorphisms by trying every vertex permutation."""
    V = tree.num_vertices
    edges = {frozenset((a, b)): be for a, b, be in tree.edges}
    count = 0
    for perm in itertools.permutations(range(V)):
        if any(tree.js[perm[v]] != tree.js[v] or tree.betas[perm[v]] != tree.betas[v] for v in range(V)):
            continue
        if any(perm[w] != w for w in tree.marks):
            continue
        if all(edges.get(frozenset((perm[a], perm[b]))) == be for a, b, be in tree.edges):
            count += 1
    return count


# --------------------------------------------------------------------------
# contributions on trees
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Insertion:
    """Insertion at a mark: restriction values, psi power, optional ``1/(-z - psi)``."""

    restriction: Mapping[int, RatFunc] | None = None
    psi_power: int = 0
    descendant: bool = False

    def restrict(self, j: int, p: ModelParams) -> RatFunc:
        if self.restriction is None:
            return RatFunc.one(p.nvars)
        return self.restriction.get(j, RatFunc.zero(p.nvars))

    def psi_factor(self, psi: RatFunc, p: ModelParams) -> RatFunc:
        out = psi ** self.psi_power
        if self.descendant:
            out = out / (RatFunc.var(p.nvars, 0) * -1 - psi)
        return out


def _oriented(tree: DecoratedTree, e: int):
    a, b, be = tree.edges[e]
    return a, b, be


def contr_edge(e: int, tree: DecoratedTree, p: ModelParams) -> RatFunc:
    a, b, be = _oriented(tree, e)
    return edge_contribution(tree.js[a], tree.js[b], be, tree.flags[(a, e)], p)


def contr_flag(v: int, e: int, tree: DecoratedTree, p: ModelParams) -> RatFunc:
    return eta(tree.js[v], tree.flags[(v, e)], p).inverse()


def _tau(tree, v, e, p) -> RatFunc:
    """``(a_{j_v} - a_{j_v'}) / beta_e`` for the flag (v, e)."""
    w = tree.other_end(e, v)
    be = tree.edges[e][2]
    return RatFunc.from_poly(_diff(p, tree.js[v], tree.js[w]).scale(Fraction(1, be)))


def contr_unstable_vertex(v: int, tree: DecoratedTree, p: ModelParams, insertions=None) -> RatFunc:
    kind = tree.kind(v, p)
    j = tree.js[v]
    incident = tree.incident(v)
    if kind == VertexKind.UNSTABLE_VAL2_NODE:
        e1, e2 = incident
        return eta(j, tree.flags[(v, e1)], p) / (_tau(tree, v, e1, p) + _tau(tree, v, e2, p))
    if kind == VertexKind.UNSTABLE_VAL2_MARK:
        (e,) = incident
        (k,) = tree.marks_at(v)
        ins = _insertion(insertions, k)
        psi = -_tau(tree, v, e, p)
        return ins.restrict(j, p) * ins.psi_factor(psi, p) * eta(j, tree.flags[(v, e)], p)
    if kind == VertexKind.UNSTABLE_VAL1:
        if not incident:
            (k,) = tree.marks_at(v)
            ins = _insertion(insertions, k)
            return ins.restrict(j, p) * eta(j, -tree.mark_sectors[k], p) * unstable_value_eq(tree.betas[v], j, p)
        (e,) = incident
        w = tree.other_end(e, v)
        return unstable_vertex_contribution(j, tree.js[w], tree.edges[e][2], tree.betas[v], tree.flags[(v, e)], p)
    raise InternalInvariantViolation(f"vertex {v} of kind {kind} has no closed-form contribution")


def _insertion(insertions, k) -> Insertion:
    if insertions is None:
        return Insertion()
    return insertions[k]


def evaluate_fully_unstable_tree(tree: DecoratedTree, insertions, p: ModelParams) -> RatFunc:
    """Product of vertex, flag and edge contributions divided by ``|Aut|``."""
    kinds = tree.kinds(p)
    if any(k == VertexKind.STABLE for k in kinds):
        raise ContainsStableVertex("tree has a stable vertex; use the symbolic path")
    total = RatFunc.const(p.nvars, Fraction(1, tree.aut_order()))
    for v in range(tree.num_vertices):
        total = total * contr_unstable_vertex(v, tree, p, insertions)
    for (v, e) in tree.flags:
        total = total * contr_flag(v, e, tree, p)
    for e in range(len(tree.edges)):
        total = total * contr_edge(e, tree, p)
    return total


def tree_contribution(tree: DecoratedTree, p: ModelParams, insertions=None):
    """Canonical contribution string, or ``"symbolic-stable"``."""
    if any(k == VertexKind.STABLE for k in tree.kinds(p)):
        return "symbolic-stable"
    return evaluate_fully_unstable_tree(tree, insertions, p).canonical_str()

"""Model parameters, twisted sectors and the (equivariant) state space.

A multiplicity ``m`` is stored as a :class:`fractions.Fraction` in ``[0, 1)``.
Non-equivariant classes are written in the basis ``H^l_(m)``; equivariant
classes in the fixed-point basis ``1^j_(m)``, whose coefficients are the
restrictions to the fixed points ``P_j`` (the hyperplane class restricts to
``a_j``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .algebra import MPoly, RatFunc, as_ratfunc
from .errors import ConfigError, NoNonequivariantLimit, OutsideCompactType


def frac(x) -> Fraction:
    """Fractional part ``<x>`` in ``[0, 1)``."""
    x = Fraction(x)
    return x - math.floor(x)


def multiplicity(a: int, d: int) -> Fraction:
    return frac(Fraction(a, d))


# --------------------------------------------------------------------------
# stability parameter
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Epsilon:
    """``0+``, a positive rational, or ``inf``."""

    kind: str
    value: Fraction | None = None

    @classmethod
    def zero_plus(cls):
        return cls("0+")

    @classmethod
    def infinity(cls):
        return cls("inf")

    @classmethod
    def rational(cls, value):
        value = Fraction(value)
        if value <= 0:
            raise ConfigError(f"epsilon must be positive, got {value}")
        return cls("rational", value)

    @classmethod
    def parse(cls, text) -> "Epsilon":
        if isinstance(text, Epsilon):
            return text
        if isinstance(text, (int, Fraction)):
            return cls.rational(text)
        s = str(text).strip()
        if s == "0+":
            return cls.zero_plus()
        if s == "inf":
            return cls.infinity()
        try:
            if "/" in s:
                p, q = s.split("/")
                value = Fraction(int(p), int(q))
            else:
                value = Fraction(int(s))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"malformed epsilon {text!r}; use '0+', 'p/q', an integer or 'inf'") from None
        return cls.rational(value)

    def is_unstable(self, beta: int) -> bool:
        """True when ``beta <= 1/epsilon``."""
        if self.kind == "0+":
            return True
        if self.kind == "inf":
            return beta == 0
        return beta * self.value <= 1

    @property
    def max_unstable(self) -> int | None:
        """Largest unstable degree, or None when every degree is unstable."""
        if self.kind == "0+":
            return None
        if self.kind == "inf":
            return 0
        return math.floor(1 / self.value)

    def __str__(self):
        if self.kind == "rational":
            v = self.value
            return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        return self.kind


# --------------------------------------------------------------------------
# model
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelParams:
    weights: tuple[int, ...]
    degree: int
    num_polys: int
    epsilon: Epsilon = field(default_factory=Epsilon.zero_plus)
    max_q_degree: int = 10

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        object.__setattr__(self, "epsilon", Epsilon.parse(self.epsilon))
        if not self.weights:
            raise ConfigError("at least one weight is required")
        if self.degree < 1 or self.num_polys < 1:
            raise ConfigError("degree and number of polynomials must be positive")
        for w in self.weights:
            if w < 1:
                raise ConfigError(f"weights must be positive, got {w}")
            if self.degree % w:
                raise ConfigError(f"weight {w} does not divide d = {self.degree}")
        if self.max_q_degree < 0:
            raise ConfigError("max_q_degree must be non-negative")

    @property
    def d(self) -> int:
        return self.degree

    @property
    def N(self) -> int:
        return self.num_polys

    @property
    def M(self) -> int:
        return len(self.weights)

    @property
    def nvars(self) -> int:
        return self.num_polys + 1

    def with_(self, **changes) -> "ModelParams":
        data = dict(
            weights=self.weights,
            degree=self.degree,
            num_polys=self.num_polys,
            epsilon=self.epsilon,
            max_q_degree=self.max_q_degree,
        )
        data.update(changes)
        return ModelParams(**data)

    # ring helpers
    def z(self) -> MPoly:
        return MPoly.var(self.nvars, 0)

    def a(self, j: int) -> MPoly:
        return MPoly.var(self.nvars, j)

    def const(self, c) -> MPoly:
        return MPoly.const(self.nvars, c)

    def sectors(self) -> list[Fraction]:
        return [Fraction(k, self.degree) for k in range(self.degree)]

    def describe(self) -> dict:
        return {
            "weights": list(self.weights),
            "d": self.degree,
            "num_polys": self.num_polys,
            "epsilon": str(self.epsilon),
            "max_q_degree": self.max_q_degree,
        }


SAMPLE_MODELS = {
    "quintic": ((1,) * 5, 5, 1),
    "cubic33": ((1,) * 6, 3, 2),
    "quadric2222": ((1,) * 8, 2, 4),
    "w1122": ((1, 1, 2, 2), 4, 2),
}


def sample_model(name: str, epsilon="0+", max_q_degree: int = 10) -> ModelParams:
    weights, d, n = SAMPLE_MODELS[name]
    return ModelParams(weights, d, n, Epsilon.parse(epsilon), max_q_degree)


# --------------------------------------------------------------------------
# sectors and pairings
# --------------------------------------------------------------------------


def broad_set(m, p: ModelParams) -> frozenset[int]:
    """``F_m``: 1-based indices i with ``m * w_i`` integral."""
    m = frac(m)
    return frozenset(i + 1 for i, w in enumerate(p.weights) if (m * w).denominator == 1)


def ct_dim(m, p: ModelParams) -> int:
    """Top H-power in sector m surviving the compact-type truncation."""
    return p.num_polys - 1 - len(broad_set(m, p))


def broad_factor(m, p: ModelParams) -> Fraction:
    """``(1/d) prod_{i in F_m} (-w_i/d)``."""
    out = Fraction(1, p.degree)
    for i in broad_set(m, p):
        out *= Fraction(-p.weights[i - 1], p.degree)
    return out


def pair_noneq(x: tuple, y: tuple, p: ModelParams) -> Fraction:
    """Pairing of basis classes ``x = (m1, l1)`` and ``y = (m2, l2)``."""
    (m1, l1), (m2, l2) = x, y
    for m, l in (x, y):
        if l < 0 or l > ct_dim(m, p):
            raise OutsideCompactType(f"H^{l}_({frac(m)}) is not of compact type")
    if frac(Fraction(m1) + Fraction(m2)) != 0:
        return Fraction(0)
    if l1 + l2 != ct_dim(m1, p):
        return Fraction(0)
    return broad_factor(m1, p)


def eta(j: int, m, p: ModelParams) -> RatFunc:
    """Self-pairing ``eta^j_(m)`` of the fixed-point basis."""
    n = p.nvars
    numer = [p.a(j).scale(Fraction(-p.weights[i - 1], p.degree)) for i in broad_set(m, p)]
    denom = [p.a(j) - p.a(k) for k in range(1, p.num_polys + 1) if k != j]
    return RatFunc.product(n, Fraction(1, p.degree), numer, denom)


def pair_eq(x: tuple, y: tuple, p: ModelParams) -> RatFunc:
    """Pairing of ``1^{j1}_(m1)`` and ``1^{j2}_(m2)``, given as ``(j, m)`` tuples."""
    (j1, m1), (j2, m2) = x, y
    if j1 != j2 or frac(Fraction(m1) + Fraction(m2)) != 0:
        return RatFunc.zero(p.nvars)
    return eta(j1, m1, p)


# --------------------------------------------------------------------------
# classes
# --------------------------------------------------------------------------


class StateClass:
    """Element of the non-equivariant state space, ``{(m, l): coefficient}``.

    With ``compact_type=True`` (default) powers are limited to ``ct_dim(m)``;
    otherwise to ``N - 1``.  Entries beyond the limit are rejected.
    """

    __slots__ = ("params", "entries", "compact_type")

    def __init__(self, p: ModelParams, entries: Mapping | None = None, compact_type: bool = True):
        self.params = p
        self.compact_type = compact_type
        out = {}
        for (m, l), c in (entries or {}).items():
            m = frac(m)
            top = ct_dim(m, p) if compact_type else p.num_polys - 1
            c = as_ratfunc(c, p.nvars)
            if c.is_zero():
                continue
            if l < 0 or l > top:
                raise OutsideCompactType(f"H^{l}_({m}) exceeds the allowed power {top}")
            out[(m, l)] = out[(m, l)] + c if (m, l) in out else c
        self.entries = {k: v for k, v in sorted(out.items()) if not v.is_zero()}

    @classmethod
    def truncated(cls, p, entries: Mapping, compact_type: bool = True) -> "StateClass":
        """Build a class, silently dropping powers above the limit."""
        keep = {}
        for (m, l), c in entries.items():
            m = frac(m)
            top = ct_dim(m, p) if compact_type else p.num_polys - 1
            if 0 <= l <= top:
                keep[(m, l)] = keep[(m, l)] + c if (m, l) in keep else c
        return cls(p, keep, compact_type)

    @classmethod
    def basis(cls, p, m, l=0, coeff=1):
        return cls(p, {(m, l): coeff})

    def is_zero(self):
        return not self.entries

    def sectors(self) -> set:
        return {m for m, _ in self.entries}

    def __getitem__(self, key):
        m, l = key
        return self.entries.get((frac(m), l), RatFunc.zero(self.params.nvars))

    def map(self, fn) -> "StateClass":
        return StateClass(self.params, {k: fn(v) for k, v in self.entries.items()}, self.compact_type)

    def __add__(self, other: "StateClass"):
        ct = self.compact_type and other.compact_type
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out[k] + v if k in out else v
        return StateClass(self.params, out, ct)

    def __neg__(self):
        return self.map(lambda c: -c)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        return self.map(lambda c: c * s)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, StateClass):
            return NotImplemented
        if set(self.entries) != set(other.entries):
            return False
        return all(self.entries[k] == other.entries[k] for k in self.entries)

    def __repr__(self):
        body = " + ".join(f"[{c}]*H^{l}_({m})" for (m, l), c in self.entries.items()) or "0"
        return f"StateClass({body})"

    def to_records(self) -> list[dict]:
        d = self.params.degree
        return [
            {"sector": int(m * d), "power": l, "coeff": c.canonical_str()}
            for (m, l), c in self.entries.items()
        ]

    @classmethod
    def from_records(cls, records: Iterable[dict], p: ModelParams, compact_type: bool = True):
        entries = {}
        for r in records:
            entries[(Fraction(r["sector"], p.degree), r["power"])] = RatFunc.parse(r["coeff"], p.nvars)
        return cls(p, entries, compact_type)


class EqStateClass:
    """Element of the equivariant state space, ``{(j, m): coefficient}``."""

    __slots__ = ("params", "entries")

    def __init__(self, p: ModelParams, entries: Mapping | None = None):
        self.params = p
        out = {}
        for (j, m), c in (entries or {}).items():
            if not 1 <= j <= p.num_polys:
                raise ValueError(f"fixed point {j} out of range")
            m = frac(m)
            c = as_ratfunc(c, p.nvars)
            out[(j, m)] = out[(j, m)] + c if (j, m) in out else c
        self.entries = {k: v for k, v in sorted(out.items()) if not v.is_zero()}

    @classmethod
    def basis(cls, p, j, m, coeff=1):
        return cls(p, {(j, m): coeff})

    def is_zero(self):
        return not self.entries

    def __getitem__(self, key):
        j, m = key
        return self.entries.get((j, frac(m)), RatFunc.zero(self.params.nvars))

    def map(self, fn) -> "EqStateClass":
        return EqStateClass(self.params, {k: fn(v) for k, v in self.entries.items()})

    def __add__(self, other):
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out[k] + v if k in out else v
        return EqStateClass(self.params, out)

    def __neg__(self):
        return self.map(lambda c: -c)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        return self.map(lambda c: c * s)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, EqStateClass):
            return NotImplemented
        if set(self.entries) != set(other.entries):
            return False
        return all(self.entries[k] == other.entries[k] for k in self.entries)

    def __repr__(self):
        body = " + ".join(f"[{c}]*1^{j}_({m})" for (j, m), c in self.entries.items()) or "0"
        return f"EqStateClass({body})"

    def to_records(self) -> list[dict]:
        d = self.params.degree
        return [
            {"sector": int(m * d), "fixed_point": j, "coeff": c.canonical_str()}
            for (j, m), c in self.entries.items()
        ]

    @classmethod
    def from_records(cls, records: Iterable[dict], p: ModelParams):
        return cls(
            p,
            {
                (r["fixed_point"], Fraction(r["sector"], p.degree)): RatFunc.parse(r["coeff"], p.nvars)
                for r in records
            },
        )


# --------------------------------------------------------------------------
# pushforward, lift and non-equivariant limit
# --------------------------------------------------------------------------


def iota_star(x, p: ModelParams):
    """Multiply each sector by its Euler factor ``(1/d) prod_{F_m} (-w_i H/d)``.

    The non-equivariant image is an ambient class (powers up to ``N - 1``),
    so the result carries ``compact_type=False``.
    """
    if isinstance(x, EqStateClass):
        out = {}
        for (j, m), c in x.entries.items():
            factor = MPoly.const(p.nvars, broad_factor(m, p)) * p.a(j) ** len(broad_set(m, p))
            out[(j, m)] = c * factor
        return EqStateClass(p, out)
    out = {}
    for (m, l), c in x.entries.items():
        shift = len(broad_set(m, p))
        if l + shift <= p.num_polys - 1:
            out[(m, l + shift)] = c * broad_factor(m, p)
    return StateClass(p, out, compact_type=False)


def lift(x: StateClass, p: ModelParams) -> EqStateClass:
    """Equivariant lift of a polynomial class: ``f_j = P(a_j)`` per sector."""
    out = {}
    for (m, l), c in x.entries.items():
        for j in range(1, p.num_polys + 1):
            v = c * (p.a(j) ** l)
            out[(j, m)] = out[(j, m)] + v if (j, m) in out else v
    return EqStateClass(p, out)


def _elementary_coeffs(roots: list[MPoly], nvars: int) -> list[MPoly]:
    """Coefficients of ``prod (H - r)`` in increasing powers of H."""
    coeffs = [MPoly.one(nvars)]
    for r in roots:
        nxt = [MPoly.zero(nvars)] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] = nxt[i + 1] + c
            nxt[i] = nxt[i] - c * r
        coeffs = nxt
    return coeffs


def interpolate(values: Mapping[int, RatFunc], p: ModelParams) -> dict[int, RatFunc]:
    """Lagrange interpolation through ``H = a_j``; returns ``{l: coeff of H^l}``."""
    n = p.nvars
    N = p.num_polys
    out = {l: RatFunc.zero(n) for l in range(N)}
    for j in range(1, N + 1):
        f = values.get(j)
        if f is None or f.is_zero():
            continue
        others = [p.a(k) for k in range(1, N + 1) if k != j]
        weight = RatFunc.product(n, 1, [], [p.a(j) - r for r in others])
        base = f * weight
        for l, c in enumerate(_elementary_coeffs(others, n)):
            if c.terms:
                out[l] = out[l] + base * c
    return out


_RAYS = ((1, 2, 3, 5, 7, 11, 13, 17), (2, -3, 7, 4, -5, 9, -11, 6))


def _t_order_and_leading(f: RatFunc, ray, p: ModelParams):
    """Substitute ``a_j = c_j t`` (t stored in slot a1); return (order, t^0-part)."""
    n = p.nvars
    t = p.a(1)
    sub = {j: t.scale(ray[j - 1]) for j in range(1, p.num_polys + 1)}
    g = f.subs(sub)
    if g.is_zero():
        return None, g

    def low(poly):
        k = min(e[1] for e in poly.terms)
        part = MPoly(n, {(e[0], 0) + e[2:]: c for e, c in poly.terms.items() if e[1] == k})
        return k, part

    kn, lead_num = low(g.num)
    order = kn
    lead_den = MPoly.one(n)
    for h, mult in g.factors.items():
        kh, part = low(h)
        order -= kh * mult
        lead_den = lead_den * part ** mult
    return order, RatFunc(n, lead_num, [(lead_den, 1)])


def scalar_limit(f: RatFunc, p: ModelParams) -> RatFunc:
    """Limit of ``f`` as all ``a_j -> 0`` along two generic rays."""
    if p.num_polys > len(_RAYS[0]):
        raise ValueError("too many fixed points for the built-in rays")
    results = []
    for ray in _RAYS:
        order, lead = _t_order_and_leading(f, ray, p)
        if order is None or order > 0:
            results.append(RatFunc.zero(p.nvars))
        elif order < 0:
            raise NoNonequivariantLimit(f"coefficient {f} diverges as a -> 0 (t-order {order})")
        else:
            results.append(lead)
    if results[0] != results[1]:
        raise NoNonequivariantLimit(f"limit of {f} depends on the direction of approach")
    return results[0]


def noneq_limit(x: EqStateClass, p: ModelParams, compact_type: bool = True) -> StateClass:
    """Interpolate each sector in H, then send all ``a_j`` to zero."""
    by_sector: dict = {}
    for (j, m), c in x.entries.items():
        by_sector.setdefault(m, {})[j] = c
    entries = {}
    for m, values in by_sector.items():
        for l, c in interpolate(values, p).items():
            if not c.is_zero():
                lim = scalar_limit(c, p)
                if not lim.is_zero():
                    entries[(m, l)] = lim
    return StateClass.truncated(p, entries, compact_type)

"""Exact arithmetic substrate: sparse polynomials and rational functions in
``z, a1, ..., aN`` over the rationals, residues and Laurent expansions in
``z``, and truncated power series in the Novikov variable ``q``.

Variable ``0`` is always ``z``; variable ``i >= 1`` is ``a_i``.  Monomials are
ordered graded-lexicographically with ``z > a1 > ... > aN``.

Denominators are kept as products of monic factors.  Almost every factor
produced by the localization formulas is a linear form, and linear forms are
irreducible, so cancelling by trial division already gives a reduced
fraction.  Nonlinear factors only appear for hand-built inputs; they are kept
as opaque atoms and a full gcd is used wherever canonicity matters.
"""
from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import DivisionByZero, InvalidPole

Number = Union[int, Fraction]


def var_names(nvars: int) -> tuple[str, ...]:
    return ("z",) + tuple(f"a{i}" for i in range(1, nvars))


def _grlex(e):
    return (sum(e), e)


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _exact_div(a, b):
    if b == 1:
        return a
    return Fraction(a) / b


# --------------------------------------------------------------------------
# polynomials
# --------------------------------------------------------------------------


def _integral(terms: dict) -> tuple[int, list]:
    den = 1
    for c in terms.values():
        if isinstance(c, Fraction) and c.denominator != 1:
            den = den * c.denominator // math.gcd(den, c.denominator)
    if den == 1:
        return 1, [(e, int(c)) for e, c in terms.items()]
    return den, [(e, int(c * den)) for e, c in terms.items()]


class MPoly:
    """Sparse polynomial: a map from exponent tuples to nonzero rationals."""

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[tuple, Number] | None = None):
        self.nvars = nvars
        self.terms = {e: c for e, c in terms.items() if c} if terms else {}
        self._hash = None

    @classmethod
    def _raw(cls, nvars, terms):
        obj = cls.__new__(cls)
        obj.nvars = nvars
        obj.terms = terms
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, nvars):
        return cls._raw(nvars, {})

    @classmethod
    def const(cls, nvars, c):
        c = _q(c)
        return cls._raw(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def one(cls, nvars):
        return cls.const(nvars, 1)

    @classmethod
    def var(cls, nvars, i, power=1):
        e = [0] * nvars
        e[i] = power
        return cls._raw(nvars, {tuple(e): Fraction(1)})

    @classmethod
    def linear(cls, nvars, coeffs: Mapping[int, Number], constant: Number = 0):
        terms = {}
        for i, c in coeffs.items():
            if c:
                e = [0] * nvars
                e[i] = 1
                e = tuple(e)
                terms[e] = terms.get(e, 0) + _q(c)
        if constant:
            terms[(0,) * nvars] = _q(constant)
        return cls(nvars, terms)

    # -- inspection -------------------------------------------------------

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        return _q(self.terms.get((0,) * self.nvars, 0))

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=-1)

    def leading(self):
        e = max(self.terms, key=_grlex)
        return e, self.terms[e]

    def lc(self):
        return self.leading()[1]

    def variables(self) -> set[int]:
        out = set()
        for e in self.terms:
            out.update(i for i, k in enumerate(e) if k)
        return out

    def depends_on(self, i: int) -> bool:
        return any(e[i] for e in self.terms)

    # -- comparison -------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, MPoly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            if not other:
                return not self.terms
            return len(self.terms) == 1 and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, MPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return MPoly.const(self.nvars, other)
        return NotImplemented

    def __neg__(self):
        return MPoly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return MPoly._raw(self.nvars, out)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        if not c:
            return MPoly.zero(self.nvars)
        if c == 1:
            return self
        return MPoly._raw(self.nvars, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, MPoly):
            return NotImplemented
        a, b = self.terms, other.terms
        if not a or not b:
            return MPoly.zero(self.nvars)
        if len(a) < len(b):
            a, b = b, a
        # integer inner loop over common denominators
        da, ia = _integral(a)
        db, ib = _integral(b)
        out: dict = {}
        get = out.get
        for e2, c2 in ib:
            for e1, c1 in ia:
                e = tuple([x + y for x, y in zip(e1, e2)])
                out[e] = get(e, 0) + c1 * c2
        den = da * db
        return MPoly._raw(self.nvars, {e: _q(Fraction(c, den)) for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = MPoly.one(self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def mul_monomial(self, e, c=1):
        return MPoly._raw(
            self.nvars,
            {tuple([x + y for x, y in zip(f, e)]): v * c for f, v in self.terms.items()},
        )

    # -- calculus and substitution --------------------------------------

    def diff(self, i: int) -> "MPoly":
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                f = list(e)
                f[i] = k - 1
                out[tuple(f)] = c * k
        return MPoly._raw(self.nvars, out)

    def subs(self, mapping: Mapping[int, "MPoly | Number"]) -> "MPoly":
        """Simultaneous substitution of polynomials for variables."""
        if not mapping or not self.terms:
            return self
        n = self.nvars
        values = {i: (v if isinstance(v, MPoly) else MPoly.const(n, v)) for i, v in mapping.items()}
        idx = sorted(values)
        powers = {i: [MPoly.one(n)] for i in idx}

        def power(i, k):
            lst = powers[i]
            while len(lst) <= k:
                lst.append(lst[-1] * values[i])
            return lst[k]

        groups: dict = {}
        for e, c in self.terms.items():
            key = tuple(e[i] for i in idx)
            rest = list(e)
            for i in idx:
                rest[i] = 0
            groups.setdefault(key, {})[tuple(rest)] = c
        out: dict = {}
        for key, rest_terms in groups.items():
            p = MPoly._raw(n, rest_terms)
            for i, k in zip(idx, key):
                if k:
                    p = p * power(i, k)
            for e, c in p.terms.items():
                v = out.get(e, 0) + c
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        return MPoly._raw(n, out)

    def evaluate(self, point: Sequence[Number]) -> Fraction:
        total = 0
        cache = [dict() for _ in range(self.nvars)]
        for e, c in self.terms.items():
            v = c
            for i, k in enumerate(e):
                if k:
                    p = cache[i].get(k)
                    if p is None:
                        p = cache[i][k] = point[i] ** k
                    v = v * p
            total += v
        return _q(total)

    def coeffs_in(self, i: int) -> dict[int, "MPoly"]:
        """Coefficients with respect to variable ``i`` (as polynomials free of it)."""
        groups: dict = {}
        for e, c in self.terms.items():
            f = list(e)
            f[i] = 0
            groups.setdefault(e[i], {})[tuple(f)] = c
        return {k: MPoly._raw(self.nvars, t) for k, t in groups.items()}

    # -- division ---------------------------------------------------------

    def divexact(self, g: "MPoly") -> "MPoly | None":
        """Quotient ``self / g`` if ``g`` divides ``self`` exactly, else None."""
        if not g.terms:
            raise DivisionByZero("division by the zero polynomial")
        if not self.terms:
            return self
        ge, gc = g.leading()
        gterms = list(g.terms.items())
        rem = dict(self.terms)
        q = {}
        while rem:
            e = max(rem, key=_grlex)
            d = tuple([x - y for x, y in zip(e, ge)])
            if min(d) < 0:
                return None
            t = _exact_div(rem[e], gc)
            q[d] = t
            for e2, c2 in gterms:
                ee = tuple([x + y for x, y in zip(d, e2)])
                v = rem.get(ee, 0) - t * c2
                if v:
                    rem[ee] = v
                else:
                    rem.pop(ee, None)
        return MPoly._raw(self.nvars, q)

    def content(self) -> Fraction:
        """Positive rational c with ``self / c`` integral and primitive."""
        if not self.terms:
            return Fraction(1)
        nums = [_q(c).numerator for c in self.terms.values()]
        dens = [_q(c).denominator for c in self.terms.values()]
        return Fraction(math.gcd(*nums), math.lcm(*dens))

    def monic(self) -> "MPoly":
        if not self.terms:
            return self
        return self.scale(_exact_div(1, self.lc()))

    # -- printing ---------------------------------------------------------

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _grlex(t[0]), reverse=True)

    def sort_key(self):
        return tuple((_grlex(e), _q(c)) for e, c in self.sorted_terms())

    def to_str(self, names: Sequence[str] | None = None) -> str:
        names = names or var_names(self.nvars)
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(e) if k
            )
            c = _q(c)
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"MPoly({self.to_str()!r})"


# --------------------------------------------------------------------------
# gcd (primitive pseudo-remainder sequences, recursive in the variables)
# --------------------------------------------------------------------------


def _prem(f: MPoly, g: MPoly, v: int) -> MPoly:
    dg = g.degree(v)
    lcg = g.coeffs_in(v)[dg]
    xv = [0] * f.nvars
    r = f
    k = f.degree(v) - dg + 1
    while r and r.degree(v) >= dg:
        dr = r.degree(v)
        lcr = r.coeffs_in(v)[dr]
        xv[v] = dr - dg
        r = r * lcg - (g * lcr).mul_monomial(tuple(xv))
        k -= 1
    return r * lcg ** k if k > 0 else r


def _content_in(f: MPoly, v: int) -> MPoly:
    n = f.nvars
    result = None
    for c in f.coeffs_in(v).values():
        if c.is_constant():
            return MPoly.one(n)
        result = c if result is None else poly_gcd(result, c)
        if result.is_constant():
            return MPoly.one(n)
    return result if result is not None else MPoly.one(n)


def _univariate(f: MPoly, v: int, point) -> list:
    """Coefficients (low to high) of f in x_v after evaluating the other variables."""
    out = [Fraction(0)] * (f.degree(v) + 1)
    for k, c in f.coeffs_in(v).items():
        out[k] = c.evaluate(point)
    return out


def _univariate_degree_of_gcd(f: list, g: list) -> int:
    def trim(p):
        while p and not p[-1]:
            p.pop()
        return p

    f, g = trim(list(f)), trim(list(g))
    while g:
        while len(f) >= len(g):
            q = f[-1] / g[-1]
            shift = len(f) - len(g)
            for i, c in enumerate(g):
                f[i + shift] -= q * c
            f = trim(f)
        f, g = g, f
    return len(f) - 1


def _coprime_by_evaluation(f: MPoly, g: MPoly, v: int) -> bool:
    """Sufficient test that f and g share no factor involving x_v.

    A specialisation that keeps both leading coefficients nonzero can only
    raise the degree of the gcd, so a constant image gcd is conclusive.
    """
    lf, lg = f.coeffs_in(v)[f.degree(v)], g.coeffs_in(v)[g.degree(v)]
    for _ in range(2):
        point = [_gcd_rng.randint(-50, 50) for _ in range(f.nvars)]
        if not lf.evaluate(point) or not lg.evaluate(point):
            continue
        if _univariate_degree_of_gcd(_univariate(f, v, point), _univariate(g, v, point)) == 0:
            return True
    return False


_gcd_rng = random.Random(20240612)


def poly_gcd(f: MPoly, g: MPoly) -> MPoly:
    """Monic greatest common divisor over the rationals."""
    n = f.nvars
    if not f.terms:
        return g.monic()
    if not g.terms:
        return f.monic()
    if f.is_constant() or g.is_constant():
        return MPoly.one(n)
    v = min(f.variables() | g.variables())
    if not f.depends_on(v):
        return poly_gcd(f, _content_in(g, v))
    if not g.depends_on(v):
        return poly_gcd(_content_in(f, v), g)
    cf, cg = _content_in(f, v), _content_in(g, v)
    c = poly_gcd(cf, cg)
    pf, pg = f.divexact(cf), g.divexact(cg)
    if _coprime_by_evaluation(pf, pg, v):
        return c.monic()
    if pf.degree(v) < pg.degree(v):
        pf, pg = pg, pf
    while True:
        r = _prem(pf, pg, v)
        if not r:
            h = pg
            break
        if r.degree(v) == 0:
            h = MPoly.one(n)
            break
        pf, pg = pg, r.divexact(_content_in(r, v))
    return (c * h.divexact(_content_in(h, v))).monic()


# --------------------------------------------------------------------------
# rational functions
# --------------------------------------------------------------------------

_rng = random.Random(20240611)


def _split_factor(p: MPoly):
    """Write p = scalar * prod(f**k) with monic nonconstant f.

    Monomial content is split into single variables, a linear remainder is
    kept as is, anything else becomes one opaque factor.
    """
    if not p.terms:
        raise DivisionByZero("zero factor in a denominator")
    n = p.nvars
    if p.is_constant():
        return p.constant_value(), []
    mins = [min(e[i] for e in p.terms) for i in range(n)]
    out = []
    if any(mins):
        p = MPoly._raw(n, {tuple([x - y for x, y in zip(e, mins)]): c for e, c in p.terms.items()})
        out.extend((MPoly.var(n, i), k) for i, k in enumerate(mins) if k)
    if p.is_constant():
        return p.constant_value(), out
    lc = _q(p.lc())
    out.append((p.scale(1 / lc), 1))
    return lc, out


def _is_linear(f: MPoly) -> bool:
    return f.total_degree() == 1


def _maybe_divides(num: MPoly, f: MPoly) -> bool:
    """Cheap necessary condition for ``f | num`` when f is linear."""
    if not _is_linear(f):
        return True
    e, _ = f.leading()
    i = e.index(1)
    point = [_rng.randint(-97, 97) for _ in range(num.nvars)]
    point[i] = 0
    rest = f - MPoly.var(f.nvars, i)
    point[i] = -rest.evaluate(point)
    return num.evaluate(point) == 0


def _cancel(num: MPoly, factors: dict, limits: Mapping | None = None):
    """Divide ``num`` by shared factors in place of ``factors``."""
    for f in list(limits if limits is not None else factors):
        budget = (limits or factors)[f]
        while budget > 0 and factors.get(f, 0) > 0 and _maybe_divides(num, f):
            q = num.divexact(f)
            if q is None:
                break
            num = q
            budget -= 1
            factors[f] -= 1
            if not factors[f]:
                del factors[f]
    return num


class RatFunc:
    """Exact rational function ``num / prod(f**k)`` in ``z, a1, ..., aN``.

    Instances are immutable and always reduced: no denominator factor
    divides the numerator.  The denominator factors are monic.
    """

    __slots__ = ("nvars", "num", "factors", "_den", "_str")

    def __init__(self, nvars: int, num: MPoly | Number = 0, den_factors: Iterable = ()):
        if not isinstance(num, MPoly):
            num = MPoly.const(nvars, num)
        factors: dict = {}
        for item in den_factors:
            f, k = item if isinstance(item, tuple) else (item, 1)
            if not isinstance(f, MPoly):
                f = MPoly.const(nvars, f)
            if k < 0:
                raise ValueError("negative multiplicity")
            scalar, parts = _split_factor(f)
            if k:
                num = num.scale(_exact_div(1, scalar ** k))
            for g, j in parts:
                factors[g] = factors.get(g, 0) + j * k
        self._init(nvars, num, factors, reduce=True)

    def _init(self, nvars, num, factors, reduce):
        self.nvars = nvars
        if not num.terms:
            factors = {}
        elif reduce and factors:
            num = _cancel(num, factors)
        self.num = num
        self.factors = factors
        self._den = None
        self._str = None

    @classmethod
    def _make(cls, nvars, num, factors, reduce=False):
        obj = cls.__new__(cls)
        obj._init(nvars, num, factors, reduce)
        return obj

    # -- constructors -----------------------------------------------------

    @classmethod
    def const(cls, nvars, c=0):
        return cls._make(nvars, MPoly.const(nvars, c), {})

    @classmethod
    def zero(cls, nvars):
        return cls.const(nvars, 0)

    @classmethod
    def one(cls, nvars):
        return cls.const(nvars, 1)

    @classmethod
    def var(cls, nvars, i):
        return cls._make(nvars, MPoly.var(nvars, i), {})

    @classmethod
    def from_poly(cls, p: MPoly):
        return cls._make(p.nvars, p, {})

    @classmethod
    def product(cls, nvars, scalar: Number, numer: Iterable[MPoly] = (), denom: Iterable[MPoly] = ()):
        """``scalar * prod(numer) / prod(denom)`` for lists of polynomial factors."""
        num = MPoly.const(nvars, scalar)
        for f in numer:
            num = num * f
        return cls(nvars, num, list(denom))

    @classmethod
    def parse(cls, text: str, nvars: int) -> "RatFunc":
        return _Parser(text, nvars).parse()

    # -- accessors --------------------------------------------------------

    @property
    def den_factors(self) -> tuple:
        return tuple(sorted(self.factors.items(), key=lambda fk: fk[0].sort_key()))

    @property
    def den(self) -> MPoly:
        if self._den is None:
            d = MPoly.one(self.nvars)
            for f, k in self.factors.items():
                d = d * f ** k
            self._den = d
        return self._den

    def is_zero(self):
        return not self.num.terms

    def __bool__(self):
        return bool(self.num.terms)

    def is_polynomial(self):
        return not self.factors

    def depends_on(self, i: int) -> bool:
        return self.num.depends_on(i) or any(f.depends_on(i) for f in self.factors)

    def is_constant(self):
        return not self.factors and self.num.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("not a constant")
        return self.num.constant_value()

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, MPoly):
            return RatFunc.from_poly(other)
        if isinstance(other, (int, Fraction)):
            return RatFunc.const(self.nvars, other)
        return NotImplemented

    def __neg__(self):
        return RatFunc._make(self.nvars, -self.num, dict(self.factors))

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.num.terms:
            return self
        if not self.num.terms:
            return other
        f1, f2 = self.factors, other.factors
        if f1 == f2:
            factors = dict(f1)
            num = self.num + other.num
            return RatFunc._make(self.nvars, num, factors, reduce=True)
        lcm = dict(f1)
        for f, k in f2.items():
            if lcm.get(f, 0) < k:
                lcm[f] = k
        n1, n2 = self.num, other.num
        for f, k in lcm.items():
            k1, k2 = f1.get(f, 0), f2.get(f, 0)
            if k > k1:
                n1 = n1 * f ** (k - k1)
            if k > k2:
                n2 = n2 * f ** (k - k2)
        num = n1 + n2
        shared = {f: k for f, k in lcm.items() if f1.get(f, 0) == f2.get(f, 0) == k}
        if num.terms and shared:
            num = _cancel(num, lcm, shared)
        return RatFunc._make(self.nvars, num, lcm)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return RatFunc.zero(self.nvars)
            return RatFunc._make(self.nvars, self.num.scale(other), dict(self.factors))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.num.terms or not other.num.terms:
            return RatFunc.zero(self.nvars)
        n1, n2 = self.num, other.num
        d1, d2 = dict(self.factors), dict(other.factors)
        if d2:
            n1 = _cancel(n1, d2)
        if d1:
            n2 = _cancel(n2, d1)
        for f, k in d2.items():
            d1[f] = d1.get(f, 0) + k
        return RatFunc._make(self.nvars, n1 * n2, d1)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if not self.num.terms:
            raise DivisionByZero("inverse of zero")
        return RatFunc(self.nvars, self.den, [(self.num, 1)])

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.num.terms:
            raise DivisionByZero("division by zero rational function")
        if other.is_constant():
            return self * _exact_div(1, other.constant_value())
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        num = self.num ** k
        return RatFunc._make(self.nvars, num, {f: m * k for f, m in self.factors.items()})

    # -- comparison -------------------------------------------------------

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        if not self.num.terms or not other.num.terms:
            return not self.num.terms and not other.num.terms
        if self.factors == other.factors:
            return self.num == other.num
        if all(_is_linear(f) for f in self.factors) and all(_is_linear(f) for f in other.factors):
            return False
        return (self.num * other.den) == (other.num * self.den)

    def __hash__(self):
        return hash(self.canonical())

    # -- substitution and calculus ---------------------------------------

    def subs(self, mapping: Mapping[int, MPoly | Number]) -> "RatFunc":
        n = self.nvars
        mapping = {i: (v if isinstance(v, MPoly) else MPoly.const(n, v)) for i, v in mapping.items()}
        num = self.num.subs(mapping)
        items = []
        for f, k in self.factors.items():
            g = f.subs(mapping) if any(f.depends_on(i) for i in mapping) else f
            if not g.terms:
                raise DivisionByZero(f"denominator factor {f} vanishes under substitution")
            items.append((g, k))
        return RatFunc(n, num, items)

    def diff(self, i: int) -> "RatFunc":
        """Partial derivative with respect to variable ``i``."""
        n = self.nvars
        moving = [(f, k) for f, k in self.factors.items() if f.depends_on(i)]
        if not moving:
            return RatFunc._make(n, self.num.diff(i), dict(self.factors), reduce=True)
        prod_all = MPoly.one(n)
        for f, _ in moving:
            prod_all = prod_all * f
        num = self.num.diff(i) * prod_all
        for f, k in moving:
            rest = prod_all.divexact(f)
            num = num - self.num * f.diff(i) * rest * k
        factors = dict(self.factors)
        for f, _ in moving:
            factors[f] += 1
        return RatFunc._make(n, num, factors, reduce=True)

    def evaluate(self, point: Sequence[Number]) -> Fraction:
        d = Fraction(1)
        for f, k in self.factors.items():
            d *= f.evaluate(point) ** k
        if not d:
            raise DivisionByZero("evaluation at a pole")
        return self.num.evaluate(point) / d

    # -- z-structure ----------------------------------------------------

    def z_free(self) -> bool:
        return not self.depends_on(0)

    # -- canonical form ---------------------------------------------------

    def canonical(self) -> tuple[MPoly, MPoly]:
        """Integer-normalised ``(num, den)`` with positive leading denominator."""
        num, den = self.num, self.den
        if not num.terms:
            return MPoly.zero(self.nvars), MPoly.one(self.nvars)
        if any(not _is_linear(f) for f in self.factors):
            g = poly_gcd(num, den)
            if not g.is_constant():
                num, den = num.divexact(g), den.divexact(g)
        lc = _q(den.lc())
        coeffs = [_q(c) / lc for c in list(num.terms.values()) + list(den.terms.values())]
        scale = Fraction(
            math.lcm(*(c.denominator for c in coeffs)), math.gcd(*(c.numerator for c in coeffs))
        )
        s = scale / lc
        return num.scale(s), den.scale(s)

    def canonical_str(self) -> str:
        if self._str is None:
            num, den = self.canonical()
            self._str = f"({num.to_str()})/({den.to_str()})"
        return self._str

    def __str__(self):
        return self.canonical_str()

    def __repr__(self):
        return f"RatFunc({self.canonical_str()!r})"


def normalize(num: MPoly, den: MPoly) -> RatFunc:
    """Reduced rational function ``num / den`` from a raw pair of polynomials."""
    if not den.terms:
        raise DivisionByZero("zero denominator")
    if not num.terms:
        return RatFunc.zero(num.nvars)
    g = poly_gcd(num, den)
    if not g.is_constant():
        num, den = num.divexact(g), den.divexact(g)
    return RatFunc(num.nvars, num, [(den, 1)])


def as_ratfunc(x, nvars: int) -> RatFunc:
    if isinstance(x, RatFunc):
        return x
    if isinstance(x, MPoly):
        return RatFunc.from_poly(x)
    return RatFunc.const(nvars, x)


# --------------------------------------------------------------------------
# residues and Laurent expansions in z
# --------------------------------------------------------------------------


def _as_point(c, nvars) -> MPoly:
    if isinstance(c, RatFunc):
        if c.factors:
            if any(f.depends_on(0) for f in c.factors) or c.num.depends_on(0):
                raise InvalidPole("pole location depends on z")
            raise InvalidPole("pole location must be a polynomial in the a-variables")
        c = c.num
    if not isinstance(c, MPoly):
        c = MPoly.const(nvars, c)
    if c.depends_on(0):
        raise InvalidPole("pole location depends on z")
    return c


def pole_order(f: RatFunc, c) -> int:
    c = _as_point(c, f.nvars)
    return _split_pole(f, c)[0]


def _split_pole(f: RatFunc, c: MPoly):
    """Order of the pole at z = c and the remaining denominator factors."""
    n = f.nvars
    zc = MPoly.var(n, 0) - c
    order = 0
    rest: dict = {}
    for g, k in f.factors.items():
        if g.depends_on(0) and not _is_linear(g):
            while g.depends_on(0) and not g.subs({0: c}).terms:
                g = g.divexact(zc)
                order += k
            # g stays monic: it is a quotient of monic polynomials
            if g.is_constant():
                continue
            for h, j in _split_factor(g)[1]:
                rest[h] = rest.get(h, 0) + j * k
        elif g == zc:
            order += k
        else:
            rest[g] = rest.get(g, 0) + k
    return order, rest


def residue_z(f: RatFunc, c) -> RatFunc:
    """Coefficient of ``(z - c)^-1`` in the Laurent expansion of f at z = c.

    Uses the derivative formula ``1/(k-1)! d^{k-1}/dz^{k-1} [(z-c)^k f]``.
    """
    n = f.nvars
    c = _as_point(c, n)
    if not f.num.terms:
        return RatFunc.zero(n)
    order, rest = _split_pole(f, c)
    if order == 0:
        return RatFunc.zero(n)
    g = RatFunc._make(n, f.num, rest, reduce=True)
    for _ in range(order - 1):
        g = g.diff(0)
    return g.subs({0: c}) * Fraction(1, math.factorial(order - 1))


def _z_coeffs(p: MPoly) -> dict[int, MPoly]:
    return p.coeffs_in(0)


def _extreme_z_coeff_factors(f: RatFunc, top: bool):
    """Lowest (or highest) z-coefficient of the denominator, as factors."""
    out = []
    for g, k in f.factors.items():
        coeffs = _z_coeffs(g)
        out.append((coeffs[max(coeffs) if top else min(coeffs)], k))
    return out


def _series_at_zero(num: dict[int, MPoly], den: dict[int, MPoly], inv_d0: RatFunc, order: int, nvars):
    """Coefficients 0..order of num(x)/den(x) at x = 0, given 1/den(0)."""
    e = []
    for k in range(order + 1):
        if k == 0:
            e.append(inv_d0)
            continue
        acc = RatFunc.zero(nvars)
        for i in range(1, k + 1):
            d = den.get(i)
            if d is not None and d.terms:
                acc = acc + e[k - i] * d
        e.append(-(acc * inv_d0))
    out = []
    for k in range(order + 1):
        acc = RatFunc.zero(nvars)
        for i in range(k + 1):
            nv = num.get(i)
            if nv is not None and nv.terms:
                acc = acc + e[k - i] * nv
        out.append(acc)
    return out


def laurent_z(f: RatFunc, direction: str, k_min: int, k_max: int) -> dict[int, RatFunc]:
    """Exact coefficients of ``z^k`` for ``k_min <= k <= k_max``.

    ``direction`` is ``"at-zero"`` (expansion at z = 0) or ``"at-infinity"``
    (expansion in powers of 1/z).  The denominator is inverted as a power
    series; coefficients below the pole order come out as exact zeros.
    """
    n = f.nvars
    out = {k: RatFunc.zero(n) for k in range(k_min, k_max + 1)}
    if not f.num.terms or k_max < k_min:
        return out
    num = _z_coeffs(f.num)
    den = _z_coeffs(f.den)
    if direction == "at-zero":
        v = min(den)
        u = min(num)
        lowest = _extreme_z_coeff_factors(f, top=False)
        inv_d0 = RatFunc(n, 1, lowest)
        shifted_den = {i - v: c for i, c in den.items()}
        shifted_num = {i - u: c for i, c in num.items()}
        # f = z^(u - v) * N(z)/D(z)
        top = k_max - (u - v)
        if top < 0:
            return out
        series = _series_at_zero(shifted_num, shifted_den, inv_d0, top, n)
        for k in out:
            i = k - (u - v)
            if 0 <= i <= top:
                out[k] = series[i]
        return out
    if direction == "at-infinity":
        dn, dd = max(num), max(den)
        highest = _extreme_z_coeff_factors(f, top=True)
        inv_d0 = RatFunc(n, 1, highest)
        rnum = {dn - i: c for i, c in num.items()}
        rden = {dd - i: c for i, c in den.items()}
        # f = sum_i c_i z^(dn - dd - i)
        top = (dn - dd) - k_min
        if top < 0:
            return out
        series = _series_at_zero(rnum, rden, inv_d0, top, n)
        for k in out:
            i = dn - dd - k
            if 0 <= i <= top:
                out[k] = series[i]
        return out
    raise ValueError(f"unknown direction {direction!r}")


def nonnegative_z_part(f: RatFunc) -> RatFunc:
    """Part of a Laurent polynomial in z with exponents >= 0.

    Only meaningful when the z-dependence of the denominator is a power of z.
    """
    n = f.nvars
    zfree = RatFunc._make(n, MPoly.one(n), {g: k for g, k in f.factors.items() if not g.depends_on(0)})
    zpart = [(g, k) for g, k in f.factors.items() if g.depends_on(0)]
    shift = 0
    for g, k in zpart:
        if g != MPoly.var(n, 0):
            raise ValueError("denominator is not a monomial in z")
        shift += k
    keep = {e: c for e, c in f.num.terms.items() if e[0] >= shift}
    num = MPoly._raw(n, {(e[0] - shift,) + e[1:]: c for e, c in keep.items()})
    return zfree * num


def z_exponents(f: RatFunc) -> dict[int, RatFunc]:
    """Split a Laurent polynomial in z into ``{k: coefficient of z^k}``."""
    n = f.nvars
    zfree = RatFunc._make(n, MPoly.one(n), {g: k for g, k in f.factors.items() if not g.depends_on(0)})
    shift = 0
    for g, k in f.factors.items():
        if g.depends_on(0):
            if g != MPoly.var(n, 0):
                raise ValueError("denominator is not a monomial in z")
            shift += k
    out = {}
    for k, c in f.num.coeffs_in(0).items():
        out[k - shift] = zfree * c
    return dict(sorted(out.items()))


# --------------------------------------------------------------------------
# truncated q-series
# --------------------------------------------------------------------------


def _is_zero(c) -> bool:
    if isinstance(c, (int, Fraction)):
        return c == 0
    return c.is_zero()


class QSeries:
    """Power series in q truncated after ``q^truncation``."""

    __slots__ = ("truncation", "coeffs")

    def __init__(self, truncation: int, coeffs: Mapping[int, object] | None = None):
        if truncation < 0:
            raise ValueError("negative truncation")
        self.truncation = truncation
        self.coeffs = {
            b: c for b, c in sorted((coeffs or {}).items()) if b <= truncation and not _is_zero(c)
        }
        if any(b < 0 for b in self.coeffs):
            raise ValueError("negative q-degree")

    def __getitem__(self, beta):
        return self.coeffs[beta]

    def get(self, beta, default=None):
        return self.coeffs.get(beta, default)

    def __contains__(self, beta):
        return beta in self.coeffs

    def items(self):
        return self.coeffs.items()

    def degrees(self):
        return list(self.coeffs)

    def is_zero(self):
        return not self.coeffs

    def truncate(self, D: int) -> "QSeries":
        return QSeries(min(D, self.truncation), self.coeffs)

    def map(self, fn) -> "QSeries":
        return QSeries(self.truncation, {b: fn(c) for b, c in self.coeffs.items()})

    def shift(self, k: int) -> "QSeries":
        """Multiply by q^k (keeping the same truncation)."""
        return QSeries(self.truncation, {b + k: c for b, c in self.coeffs.items()})

    def __add__(self, other: "QSeries"):
        D = min(self.truncation, other.truncation)
        out = {b: c for b, c in self.coeffs.items() if b <= D}
        for b, c in other.coeffs.items():
            if b <= D:
                out[b] = out[b] + c if b in out else c
        return QSeries(D, out)

    def __neg__(self):
        return self.map(lambda c: -c)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "QSeries":
        return self.map(lambda c: c * s)

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return self.scale(other)
        D = min(self.truncation, other.truncation)
        out: dict = {}
        for b1, c1 in self.coeffs.items():
            for b2, c2 in other.coeffs.items():
                b = b1 + b2
                if b > D:
                    continue
                t = c1 * c2
                out[b] = out[b] + t if b in out else t
        return QSeries(D, out)

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        if self.truncation != other.truncation:
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        for b in keys:
            a, c = self.coeffs.get(b), other.coeffs.get(b)
            if a is None or c is None:
                return False
            if not a == c:
                return False
        return True

    def __repr__(self):
        body = ", ".join(f"q^{b}: {c}" for b, c in self.coeffs.items())
        return f"QSeries(D={self.truncation}, {{{body}}})"


def qseries_mul(f: QSeries, g: QSeries) -> QSeries:
    return f * g


# --------------------------------------------------------------------------
# parsing of the canonical string form (and general expressions)
# --------------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str, nvars: int):
        self.nvars = nvars
        self.names = {name: i for i, name in enumerate(var_names(nvars))}
        self.toks = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text):
        toks = []
        i = 0
        while i < len(text):
            ch = text[i]
            if ch.isspace():
                i += 1
            elif ch.isdigit():
                j = i
                while j < len(text) and text[j].isdigit():
                    j += 1
                toks.append(("num", int(text[i:j])))
                i = j
            elif ch.isalpha():
                j = i
                while j < len(text) and text[j].isalnum():
                    j += 1
                toks.append(("var", text[i:j]))
                i = j
            elif ch in "+-*/^()":
                toks.append((ch, ch))
                i += 1
            else:
                raise ValueError(f"unexpected character {ch!r} in {text!r}")
        return toks

    def peek(self):
        return self.toks[self.pos][0] if self.pos < len(self.toks) else None

    def take(self, kind=None):
        tok = self.toks[self.pos]
        if kind is not None and tok[0] != kind:
            raise ValueError(f"expected {kind!r}, found {tok[1]!r}")
        self.pos += 1
        return tok

    def parse(self) -> RatFunc:
        val = self.expr()
        if self.pos != len(self.toks):
            raise ValueError("trailing input")
        return val

    def expr(self):
        val = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self):
        val = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()[0]
            rhs = self.unary()
            val = val * rhs if op == "*" else val / rhs
        return val

    def unary(self):
        if self.peek() == "-":
            self.take()
            return -self.unary()
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.take()
            neg = False
            if self.peek() == "-":
                self.take()
                neg = True
            k = self.take("num")[1]
            base = base ** (-k if neg else k)
        return base

    def atom(self):
        kind = self.peek()
        if kind == "num":
            return RatFunc.const(self.nvars, self.take()[1])
        if kind == "var":
            name = self.take()[1]
            if name not in self.names:
                raise ValueError(f"unknown variable {name!r}")
            return RatFunc.var(self.nvars, self.names[name])
        if kind == "(":
            self.take()
            val = self.expr()
            self.take(")")
            return val
        raise ValueError("unexpected end of expression")

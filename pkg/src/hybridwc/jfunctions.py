"""Closed-form unstable J-function data.

Non-equivariant coefficients are polynomials in the nilpotent hyperplane
class H with Laurent-in-z coefficients; they are computed as truncated
H-series.  Equivariant coefficients restrict H to ``a_j`` and are plain
rational functions of z and the a-variables.
"""
from __future__ import annotations

import math
from fractions import Fraction

from .algebra import MPoly, QSeries, RatFunc, laurent_z, nonnegative_z_part
from .state_space import (
    EqStateClass,
    ModelParams,
    StateClass,
    ct_dim,
    frac,
    iota_star,
)


def progression(fpart, lo, hi, lo_strict: bool, hi_strict: bool) -> list[Fraction]:
    """All b with ``<b> = fpart`` in the interval from lo to hi."""
    fpart, lo, hi = frac(fpart), Fraction(lo), Fraction(hi)
    b = math.floor(lo) + fpart
    if b < lo or (lo_strict and b == lo):
        b += 1
    out = []
    while b < hi or (not hi_strict and b == hi):
        out.append(b)
        b += 1
    return out


def sector_of(beta: int, p: ModelParams) -> Fraction:
    return frac(Fraction(beta + 1, p.degree))


def _unstable_pieces(beta: int, p: ModelParams, include_zero: bool):
    """(numerator factors as (b, w_i/d), denominator integers b) of the unstable product."""
    num = []
    for w in p.weights:
        top = Fraction(w * (beta + 1), p.degree)
        for b in progression(top, 0, top, lo_strict=not include_zero, hi_strict=True):
            num.append((b, Fraction(w, p.degree)))
    den = list(range(1, beta + 1))
    return num, den


def _hseries_mul(x: list, y: list, top: int) -> list:
    out = [None] * (top + 1)
    for i, u in enumerate(x):
        if u is None:
            continue
        for j, v in enumerate(y):
            if v is None or i + j > top:
                continue
            t = u * v
            out[i + j] = t if out[i + j] is None else out[i + j] + t
    return out


def _noneq_product(beta: int, p: ModelParams, top: int, sign: int, include_zero: bool):
    """H-series (length top+1) of ``z prod(sign*b z - w H/d) / prod_j prod_b (sign*b z + H)``.

    ``sign = -1`` is the plain coefficient, ``sign = +1`` its ``z -> -z``
    image up to the overall sign of the leading z.
    """
    n = p.nvars
    z = MPoly.var(n, 0)
    series = [RatFunc.from_poly(z)] + [None] * top
    num, den = _unstable_pieces(beta, p, include_zero)
    for b, wd in num:
        factor = [RatFunc.from_poly(z.scale(sign * b)), RatFunc.const(n, -wd)]
        series = _hseries_mul(series, factor, top)
    for b in den:
        # 1/(c z + H) = sum_k (-1)^k H^k / (c z)^(k+1), with c = -sign*b
        c = -sign * b
        inv = [RatFunc(n, (-1) ** k, [(z.scale(c), k + 1)]) for k in range(top + 1)]
        for _ in range(p.num_polys):
            series = _hseries_mul(series, inv, top)
    return series


def unstable_coeff_noneq(beta: int, p: ModelParams) -> StateClass:
    """q^beta coefficient of the small J-function (unstable closed form)."""
    m = sector_of(beta, p)
    top = ct_dim(m, p)
    if top < 0:
        return StateClass(p)
    series = _noneq_product(beta, p, top, sign=-1, include_zero=False)
    return StateClass(p, {(m, l): c for l, c in enumerate(series) if c is not None})


def unstable_value_eq(beta: int, j: int, p: ModelParams) -> RatFunc:
    """Restriction to ``P_j`` of the unstable coefficient (H replaced by a_j)."""
    n = p.nvars
    z, aj = p.z(), p.a(j)
    numer = [z]
    for b, wd in _unstable_pieces(beta, p, include_zero=False)[0]:
        numer.append(z.scale(-b) - aj.scale(wd))
    denom = []
    for k in range(1, p.num_polys + 1):
        shift = aj - p.a(k)
        for b in range(1, beta + 1):
            denom.append(z.scale(b) + shift)
    return RatFunc.product(n, 1, numer, denom)


def unstable_coeff_eq(beta: int, j: int, p: ModelParams) -> EqStateClass:
    return EqStateClass(p, {(j, sector_of(beta, p)): unstable_value_eq(beta, j, p)})


def _unstable_degrees(p: ModelParams, D: int | None):
    D = p.max_q_degree if D is None else D
    top = p.epsilon.max_unstable
    last = D if top is None else min(D, top)
    return D, range(last + 1)


def j_plus(p: ModelParams, D: int | None = None) -> QSeries:
    """``[J]_+``: the non-negative z part of the unstable terms, up to q^D."""
    D, betas = _unstable_degrees(p, D)
    out = {}
    for beta in betas:
        c = unstable_coeff_noneq(beta, p).map(nonnegative_z_part)
        if not c.is_zero():
            out[beta] = c
    return QSeries(D, out)


def mu_coeff(beta: int, p: ModelParams) -> StateClass:
    """Mirror-map coefficient: q^beta part of ``[J]_+ - z 1``."""
    if beta == 0 or not p.epsilon.is_unstable(beta):
        return StateClass(p)
    return unstable_coeff_noneq(beta, p).map(nonnegative_z_part)


def nu_coeff(beta: int, j: int, p: ModelParams, z_order: int) -> EqStateClass:
    """Vertex mirror-map coefficient up to ``z^z_order``.

    The vertex J-function is expanded as a Laurent series at z = 0, so its
    non-negative part is a power series in z; it is truncated after
    ``z^z_order``.  For beta = 0 the term ``1^j_(1/d) z`` is removed.
    """
    if beta == 0 or not p.epsilon.is_unstable(beta):
        return EqStateClass(p)
    n = p.nvars
    value = unstable_value_eq(beta, j, p)
    z = MPoly.var(n, 0)
    total = RatFunc.zero(n)
    for k, c in laurent_z(value, "at-zero", 0, z_order).items():
        if not c.is_zero():
            total = total + c * z ** k
    return EqStateClass(p, {(j, sector_of(beta, p)): total})


def _negate_z(c: RatFunc) -> RatFunc:
    return c.subs({0: MPoly.var(c.nvars, 0).scale(-1)})


def iota_J_unstable(p: ModelParams, D: int | None = None) -> QSeries:
    """Unstable part of ``iota_* J(q, -z)``, computed from its own product formula."""
    D, betas = _unstable_degrees(p, D)
    out = {}
    for beta in betas:
        m = sector_of(beta, p)
        top = p.num_polys - 1
        # -(z/d) prod_{0<=b}(b z - w H/d) / prod (-b z + H)
        series = _noneq_product(beta, p, top, sign=+1, include_zero=True)
        scale = Fraction(-1, p.degree)
        c = StateClass(
            p,
            {(m, l): s * scale for l, s in enumerate(series) if s is not None},
            compact_type=False,
        )
        if not c.is_zero():
            out[beta] = c
    return QSeries(D, out)


def iota_J_via_pushforward(beta: int, p: ModelParams) -> StateClass:
    """``iota_*(unstable_coeff_noneq(beta))`` with ``z -> -z``."""
    return iota_star(unstable_coeff_noneq(beta, p), p).map(_negate_z)


def f_unstable_coeff(beta: int, j: int, m, p: ModelParams) -> RatFunc:
    """q^beta coefficient of the unstable part of ``f_{j,m}``; zero off-sector."""
    n = p.nvars
    m = frac(m)
    if sector_of(beta, p) != m:
        return RatFunc.zero(n)
    z, aj = p.z(), p.a(j)
    numer = [z]
    for w in p.weights:
        top = Fraction(w * (beta + 1), p.degree)
        for b in progression(w * m, 0, top, lo_strict=False, hi_strict=True):
            numer.append(z.scale(b) - aj.scale(Fraction(w, p.degree)))
    denom = []
    for k in range(1, p.num_polys + 1):
        shift = aj - p.a(k)
        for b in range(0, beta + 1):
            factor = z.scale(-b) + shift
            if factor:
                denom.append(factor)
    return RatFunc.product(n, Fraction(-1, p.degree), numer, denom)


def f_unstable(j: int, m, p: ModelParams, D: int | None = None) -> QSeries:
    """Unstable part of ``f_{j,m}`` as a q-series up to q^D."""
    D, betas = _unstable_degrees(p, D)
    out = {}
    for beta in betas:
        c = f_unstable_coeff(beta, j, m, p)
        if not c.is_zero():
            out[beta] = c
    return QSeries(D, out)


def homogeneous_degree(beta: int, p: ModelParams) -> int:
    """Degree of the beta coefficient when z, a_j and H all have degree 1."""
    numer = sum(len(progression(Fraction(w * (beta + 1), p.degree), 0, Fraction(w * (beta + 1), p.degree), True, True)) for w in p.weights)
    return 1 + numer - p.num_polys * beta

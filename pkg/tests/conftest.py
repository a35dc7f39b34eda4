import random
from fractions import Fraction

import pytest
import sympy

from hybridwc.algebra import MPoly, RatFunc, var_names


def to_sympy(f, nvars):
    """Independent view of an MPoly or RatFunc as a sympy expression."""
    syms = sympy.symbols(var_names(nvars))
    if isinstance(f, MPoly):
        f = RatFunc.from_poly(f)
    num, den = f.canonical()
    def conv(p):
        total = sympy.Integer(0)
        for e, c in p.terms.items():
            term = sympy.Rational(c.numerator, c.denominator) if isinstance(c, Fraction) else sympy.Integer(c)
            for s, k in zip(syms, e):
                term *= s**k
            total += term
        return total
    return conv(num) / conv(den)


def sympy_equal(f, g, nvars):
    """Cross-multiplied comparison; avoids sympy's slow multivariate cancel."""
    n1, d1 = sympy.fraction(to_sympy(f, nvars))
    n2, d2 = sympy.fraction(sympy.together(g))
    return sympy.expand(n1 * d2 - n2 * d1) == 0


class RandomAlgebra:
    """Seeded generator of small polynomials and factored rational functions."""

    def __init__(self, seed, nvars=3):
        self.r = random.Random(seed)
        self.n = nvars

    def poly(self, terms=3, deg=2):
        p = MPoly.zero(self.n)
        for _ in range(self.r.randint(0, terms)):
            c = Fraction(self.r.randint(-5, 5), self.r.randint(1, 3))
            m = MPoly.const(self.n, c)
            for i in range(self.n):
                k = self.r.randint(0, deg)
                if k:
                    m = m * MPoly.var(self.n, i, k)
            p = p + m
        return p

    def linear(self, with_z=True):
        while True:
            coeffs = {i: self.r.randint(-2, 2) for i in range(self.n)}
            if with_z and not coeffs[0]:
                coeffs[0] = 1
            f = MPoly.linear(self.n, coeffs, self.r.randint(-2, 2))
            if f and (not with_z or f.depends_on(0)):
                return f

    def a_form(self):
        """Nonzero linear form in the a-variables only."""
        while True:
            f = MPoly.linear(self.n, {i: self.r.randint(-2, 2) for i in range(1, self.n)}, self.r.randint(-1, 1))
            if f and not f.depends_on(0):
                return f

    def ratfunc(self, max_factors=2):
        scalar = Fraction(self.r.randint(-4, 4) or 1, self.r.randint(1, 3))
        num = self.poly() or MPoly.one(self.n)
        den = [self.linear(with_z=self.r.random() < 0.7) for _ in range(self.r.randint(0, max_factors))]
        return RatFunc.product(self.n, scalar, [num], den)


@pytest.fixture
def rng():
    return RandomAlgebra(20240601)

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from algebra_props import (
    normalize_idempotent,
    partial_fractions_complete,
    random_pole_function,
    random_simple_poles,
    residue_matches_laurent,
    ring_axioms_hold,
)
from conftest import RandomAlgebra, sympy_equal, to_sympy
from hybridwc.algebra import (
    MPoly,
    QSeries,
    RatFunc,
    laurent_z,
    nonnegative_z_part,
    normalize,
    pole_order,
    poly_gcd,
    qseries_mul,
    residue_z,
    z_exponents,
)
from hybridwc.errors import DivisionByZero, InvalidPole

N = 3
z, a1, a2 = (MPoly.var(N, i) for i in range(N))


def R(text):
    return RatFunc.parse(text, N)


# -- normalize ---------------------------------------------------------------


def test_normalize_difference_of_squares():
    f = normalize(z * z - a1 * a1, z - a1)
    assert f.canonical_str() == "(z + a1)/(1)"


def test_normalize_zero_numerator():
    assert normalize(MPoly.zero(N), z + a1).canonical_str() == "(0)/(1)"


def test_normalize_content():
    f = normalize(z.scale(2) + 2, MPoly.const(N, 4))
    assert f.canonical_str() == "(z + 1)/(2)"


def test_normalize_zero_denominator():
    with pytest.raises(DivisionByZero):
        normalize(z, MPoly.zero(N))


def test_denominator_leading_coefficient_positive():
    num, den = normalize(z, -a1 + a2).canonical()
    assert den.lc() > 0
    assert normalize(z, -a1 + a2) == normalize(-z, a1 - a2)


def test_parse_canonical_round_trip(rng):
    for _ in range(100):
        f = rng.ratfunc()
        assert R(f.canonical_str()) == f
        assert R(f.canonical_str()).canonical_str() == f.canonical_str()


# -- residues and expansions --------------------------------------------------


def test_residue_simple_unit():
    assert residue_z(R("1/(z - a1)"), a1) == RatFunc.one(N)


def test_residue_two_poles():
    # partial fractions by hand: z/((z-a1)(z-a2)) = a1/(a1-a2) / (z-a1) + ...
    assert residue_z(R("z/((z - a1)*(z - a2))"), a1) == R("a1/(a1 - a2)")


def test_residue_regular_point_is_zero():
    assert residue_z(R("z + a1"), a2).is_zero()


def test_residue_rejects_z_dependent_pole():
    with pytest.raises(InvalidPole):
        residue_z(R("1/(z - a1)"), z + a1)


def test_residue_higher_order_matches_sympy():
    f = R("(z^2 + a1)/((z - a1)^3*(z + a2))")
    s = sympy.symbols("z a1 a2")
    expected = sympy.residue(to_sympy(f, N), s[0], s[1])
    assert sympy_equal(residue_z(f, a1), expected, N)
    assert pole_order(f, a1) == 3


def test_laurent_at_zero_geometric():
    out = laurent_z(R("1/(z + a1)"), "at-zero", 0, 1)
    assert out[0] == R("1/a1") and out[1] == R("-1/a1^2")


def test_laurent_at_infinity_geometric():
    out = laurent_z(R("1/(z + a1)"), "at-infinity", -2, -1)
    assert out[-1] == RatFunc.one(N) and out[-2] == R("-a1")


def test_laurent_regular_at_zero():
    out = laurent_z(R("z^2/(z - a1)"), "at-zero", -1, 0)
    assert out[-1].is_zero() and out[0].is_zero()


def test_laurent_matches_sympy_series():
    f = R("(z + a2)/((z - a1)^2*(2*z + a2))")
    s = sympy.symbols("z a1 a2")
    ser = sympy.series(to_sympy(f, N), s[0], 0, 4).removeO()
    out = laurent_z(f, "at-zero", 0, 3)
    for k in range(4):
        assert sympy_equal(out[k], ser.coeff(s[0], k), N)


def test_z_exponent_split():
    f = R("(3*z^3 + a1*z - 2)/(z^2)")
    parts = z_exponents(f)
    assert parts == {1: RatFunc.const(N, 3), -1: R("a1"), -2: RatFunc.const(N, -2)}
    assert nonnegative_z_part(f) == R("3*z")


# -- q-series -----------------------------------------------------------------


def _q(*coeffs, D):
    return QSeries(D, {b: RatFunc.const(N, c) for b, c in enumerate(coeffs)})


def test_qseries_mul_examples():
    assert qseries_mul(_q(1, 1, D=2), _q(1, -1, D=2)) == _q(1, 0, -1, D=2)
    assert qseries_mul(_q(1, 1, 1, 1, D=5), _q(1, D=1)) == _q(1, 1, D=1)
    assert qseries_mul(_q(0, 1, D=1), _q(0, 1, D=1)) == QSeries(1)


def test_qseries_truncation_is_minimum():
    assert (_q(1, D=3) + _q(1, D=5)).truncation == 3


# -- oracle comparisons ---------------------------------------------------------


def test_arithmetic_against_sympy(rng):
    for _ in range(60):
        f, g = rng.ratfunc(), rng.ratfunc()
        sf, sg = to_sympy(f, N), to_sympy(g, N)
        assert sympy_equal(f + g, sf + sg, N)
        assert sympy_equal(f * g, sf * sg, N)
        assert sympy_equal(f - g, sf - sg, N)
        if not g.is_zero():
            assert sympy_equal(f / g, sf / sg, N)


def test_gcd_against_sympy(rng):
    for _ in range(60):
        common = rng.poly(terms=2) or MPoly.one(N)
        f, g = rng.poly() * common, rng.poly() * common
        if f.is_zero() or g.is_zero():
            continue
        ours = to_sympy(poly_gcd(f, g), N)
        theirs = sympy.gcd(to_sympy(f, N), to_sympy(g, N))
        assert sympy.simplify(ours / theirs).is_number


def test_derivative_and_substitution_against_sympy(rng):
    s = sympy.symbols("z a1 a2")
    for _ in range(50):
        f = rng.ratfunc()
        assert sympy_equal(f.diff(0), sympy.diff(to_sympy(f, N), s[0]), N)
        g = f.subs({1: a2 + 1})
        assert sympy_equal(g, to_sympy(f, N).subs(s[1], s[2] + 1), N)


# -- properties -------------------------------------------------------------------


coeff = st.fractions(min_value=-6, max_value=6, max_denominator=4)
monomial = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2))
polys = st.dictionaries(monomial, coeff, max_size=4).map(lambda t: MPoly(N, t))


@settings(max_examples=300, deadline=None)
@given(polys, polys, polys)
def test_polynomial_ring_axioms(x, y, w):
    assert ring_axioms_hold(x, y, w)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_ratfunc_ring_axioms(seed):
    gen = RandomAlgebra(seed)
    assert ring_axioms_hold(gen.ratfunc(), gen.ratfunc(), gen.ratfunc())


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_normalize_idempotent(seed):
    assert normalize_idempotent(RandomAlgebra(seed).ratfunc())


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_residue_laurent_agreement(seed):
    f, poles = random_pole_function(RandomAlgebra(seed))
    for c in poles:
        assert residue_matches_laurent(f, c)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_partial_fractions_completeness(seed):
    assert partial_fractions_complete(*random_simple_poles(RandomAlgebra(seed)))


def test_inverse_and_division_by_zero(rng):
    f = rng.ratfunc()
    assert f * f.inverse() == RatFunc.one(N)
    with pytest.raises(DivisionByZero):
        RatFunc.zero(N).inverse()


def test_evaluate_exact():
    f = R("(z + a1)/(z - a2)")
    assert f.evaluate([1, 2, 3]) == Fraction(3, -2)

from fractions import Fraction

import pytest

from hybridwc.algebra import MPoly, RatFunc
from hybridwc.errors import ConfigError, NoNonequivariantLimit, OutsideCompactType
from hybridwc.state_space import (
    EqStateClass,
    Epsilon,
    ModelParams,
    StateClass,
    broad_set,
    ct_dim,
    eta,
    interpolate,
    iota_star,
    lift,
    noneq_limit,
    pair_eq,
    pair_noneq,
    sample_model,
)

F = Fraction


@pytest.fixture
def quintic():
    return sample_model("quintic")


@pytest.fixture
def cubic():
    return sample_model("cubic33")


def R(text, p):
    return RatFunc.parse(text, p.nvars)


# -- parameters ---------------------------------------------------------------


def test_epsilon_grammar():
    assert Epsilon.parse("0+").max_unstable is None
    third = Epsilon.parse("1/3")
    assert third.max_unstable == 3
    assert third.is_unstable(3) and not third.is_unstable(4)
    assert Epsilon.parse("inf").max_unstable == 0
    assert Epsilon.parse("2").max_unstable == 0 and Epsilon.parse("2").is_unstable(0)
    for bad in ("abc", "1/0", "-1/2", "0"):
        with pytest.raises(ConfigError):
            Epsilon.parse(bad)


def test_weights_must_divide_degree():
    with pytest.raises(ConfigError):
        ModelParams((1, 1, 3), 4, 1)
    with pytest.raises(ConfigError):
        ModelParams((1,), 5, 1, max_q_degree=-1)


def test_sectors_and_broad_sets():
    p = sample_model("w1122")
    assert broad_set(F(1, 2), p) == {3, 4}
    assert broad_set(F(1, 4), p) == frozenset()
    assert broad_set(0, p) == {1, 2, 3, 4}
    assert ct_dim(F(1, 4), p) == 1 and ct_dim(F(1, 2), p) == -1


# -- pairings -------------------------------------------------------------------


def test_pair_eq_examples(cubic, quintic):
    assert pair_eq((1, F(1, 3)), (1, F(2, 3)), cubic) == R("1/(3*a1 - 3*a2)", cubic)
    assert pair_eq((1, F(1, 5)), (1, F(4, 5)), quintic) == RatFunc.const(quintic.nvars, F(1, 5))
    assert pair_eq((1, F(1, 3)), (2, F(2, 3)), cubic).is_zero()


@pytest.mark.parametrize("name", ["quintic", "cubic33", "quadric2222", "w1122"])
def test_noneq_pairing_by_localization(name):
    """sum_j a_j^(l1+l2) eta^j_(m) is a polynomial whose value at a = 0 is the pairing."""
    p = sample_model(name)
    origin = [0] * p.nvars
    for m in p.sectors():
        top = ct_dim(m, p)
        for l1 in range(top + 1):
            for l2 in range(top + 1):
                total = RatFunc.zero(p.nvars)
                for j in range(1, p.num_polys + 1):
                    total = total + eta(j, m, p) * p.a(j) ** (l1 + l2)
                assert total.is_polynomial()
                assert total.evaluate(origin) == pair_noneq((m, l1), (-m, l2), p)


def test_pair_noneq_rejects_non_compact(cubic):
    with pytest.raises(OutsideCompactType):
        pair_noneq((0, 0), (0, 0), cubic)


# -- pushforward ------------------------------------------------------------------


def test_iota_star_examples(quintic, cubic):
    x = StateClass.basis(quintic, F(1, 5))
    assert iota_star(x, quintic) == StateClass(quintic, {(F(1, 5), 0): F(1, 5)}, compact_type=False)
    y = EqStateClass.basis(cubic, 1, 0)
    assert iota_star(y, cubic) == EqStateClass(cubic, {(1, 0): R("a1^6/2187", cubic)})
    assert iota_star(StateClass(cubic), cubic).is_zero()


def test_iota_star_commutes_with_lift(cubic):
    """Pushing forward then restricting equals restricting then pushing forward."""
    p = sample_model("w1122")
    for m in p.sectors():
        for l in range(ct_dim(m, p) + 1):
            x = StateClass.basis(p, m, l, coeff=3)
            pushed = iota_star(x, p)
            via_lift = iota_star(lift(x, p), p)
            assert noneq_limit(via_lift, p, compact_type=False) == pushed


# -- interpolation and limits -------------------------------------------------------


def test_noneq_limit_examples(cubic):
    m = F(2, 3)
    hx = EqStateClass(cubic, {(j, m): RatFunc.from_poly(cubic.a(j)) for j in (1, 2)})
    assert noneq_limit(hx, cubic) == StateClass.basis(cubic, m, 1)
    one = EqStateClass(cubic, {(j, m): 1 for j in (1, 2)})
    assert noneq_limit(one, cubic) == StateClass.basis(cubic, m, 0)
    p = sample_model("w1122")
    half = EqStateClass(p, {(j, F(1, 2)): RatFunc.from_poly(p.a(j)) for j in (1, 2)})
    assert noneq_limit(half, p).is_zero()


def test_noneq_limit_quintic_spot_value(quintic):
    v = R("z*(-(z + a1)/5)^5/(120*z^5)", quintic)
    x = EqStateClass(quintic, {(1, F(1, 5)): v})
    assert noneq_limit(x, quintic) == StateClass(quintic, {(F(1, 5), 0): R("-z/375000", quintic)})


def test_noneq_limit_detects_divergence(cubic):
    x = EqStateClass(cubic, {(j, F(1, 3)): R(f"1/a{j}", cubic) for j in (1, 2)})
    with pytest.raises(NoNonequivariantLimit):
        noneq_limit(x, cubic)


def test_interpolation_recovers_polynomials():
    p = sample_model("quadric2222")
    z = p.z()
    coeffs = {0: z + 1, 1: z.scale(F(1, 2)), 3: MPoly.const(p.nvars, 7)}
    values = {}
    for j in range(1, 5):
        values[j] = RatFunc.from_poly(sum((c * p.a(j) ** l for l, c in coeffs.items()), MPoly.zero(p.nvars)))
    got = interpolate(values, p)
    assert {l: c for l, c in got.items() if not c.is_zero()} == {l: RatFunc.from_poly(c) for l, c in coeffs.items()}


def test_lift_limit_round_trip():
    p = sample_model("quadric2222")
    z = p.z()
    x = StateClass(p, {(F(1, 2), 0): z, (F(1, 2), 2): F(-3, 4)})
    assert noneq_limit(lift(x, p), p) == x


def test_state_class_rejects_non_compact(cubic):
    with pytest.raises(OutsideCompactType):
        StateClass(cubic, {(F(2, 3), 2): 1})
    assert StateClass.truncated(cubic, {(F(2, 3), 2): 1}).is_zero()


def test_records_round_trip(cubic):
    x = StateClass(cubic, {(F(2, 3), 0): R("1/z", cubic), (F(2, 3), 1): R("-2/z^2", cubic)})
    assert StateClass.from_records(x.to_records(), cubic) == x
    y = EqStateClass(cubic, {(2, F(1, 3)): R("1/(z + a1 - a2)", cubic)})
    assert EqStateClass.from_records(y.to_records(), cubic) == y

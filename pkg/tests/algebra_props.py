"""Property checks on the algebra kernel, shared by unit and acceptance tests."""
from hybridwc.algebra import MPoly, RatFunc, laurent_z, normalize, residue_z


def ring_axioms_hold(x, y, w) -> bool:
    return (
        (x + y) + w == x + (y + w)
        and (x * y) * w == x * (y * w)
        and x * (y + w) == x * y + x * w
        and x + y == y + x
        and x * y == y * x
        and (x - y) + y == x
    )


def normalize_idempotent(f: RatFunc) -> bool:
    once = normalize(*f.canonical())
    twice = normalize(*once.canonical())
    return once.canonical_str() == twice.canonical_str() == f.canonical_str()


def residue_matches_laurent(f: RatFunc, c: MPoly) -> bool:
    z = MPoly.var(f.nvars, 0)
    shifted = f.subs({0: z + c})
    return residue_z(f, c) == laurent_z(shifted, "at-zero", -1, -1)[-1]


def partial_fractions_complete(numer: MPoly, poles: list) -> bool:
    """``numer / prod(z - c)`` equals the sum of its simple-pole terms."""
    n = numer.nvars
    z = MPoly.var(n, 0)
    f = RatFunc.product(n, 1, [numer], [z - c for c in poles])
    total = RatFunc.zero(n)
    for c in poles:
        total = total + residue_z(f, c) * RatFunc.product(n, 1, [], [z - c])
    return total == f


def random_pole_function(gen, max_mult=3):
    """A rational function with a-form poles of multiplicity up to max_mult; returns (f, poles)."""
    n = gen.n
    z = MPoly.var(n, 0)
    poles = []
    while len(poles) < gen.r.randint(1, 3):
        c = gen.a_form()
        if c not in poles:
            poles.append(c)
    den = []
    for c in poles:
        den += [z - c] * gen.r.randint(1, max_mult)
    num = gen.poly() or MPoly.one(n)
    return RatFunc.product(n, 1, [num], den), poles


def random_simple_poles(gen):
    n = gen.n
    poles = []
    r = gen.r.randint(1, 4)
    while len(poles) < r:
        c = gen.a_form()
        if c not in poles:
            poles.append(c)
    numer = MPoly.zero(n)
    for k in range(r):
        numer = numer + gen.a_form() * MPoly.var(n, 0, k)
    return numer, poles

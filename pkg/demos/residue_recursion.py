"""Residue recursion for two cubics in P^5.

The unstable series f_{1,2/3} has a simple pole at z = a1 - a2.  Its
residue, coefficient by coefficient, equals minus q times the recursion
coefficient times the neighbouring series at P_2 evaluated at the pole.
"""
from fractions import Fraction

from hybridwc.graphs import recursion_coeff
from hybridwc.verifiers import check_residue_recursion
from hybridwc.state_space import sample_model


def main():
    p = sample_model("cubic33")
    m = Fraction(2, 3)
    print("RC =", recursion_coeff(m, m, 1, 2, 1, p))
    rep = check_residue_recursion(1, 2, m, m, 1, p, 7)
    for beta in range(rep.modulus + 1):
        lhs = rep.lhs.get(beta)
        if lhs is not None:
            print(f"q^{beta}: residue = {lhs}")
            print(f"      recursion = {rep.rhs[beta]}")
    print("verdict:", rep.verdict)

    wrong = check_residue_recursion(1, 2, m, m, 1, p, 7, rc_scale=2)
    print("with RC doubled:", wrong.verdict, "at beta =", wrong.witness["beta"])

    finite = sample_model("cubic33", epsilon="1/2")
    rep = check_residue_recursion(1, 2, m, 0, 2, finite, 8)
    print(f"\nepsilon = 1/2: compared through q^{rep.modulus}, boundary degrees {rep.boundary}: {rep.verdict}")
    for beta in rep.boundary:
        print(f"  boundary q^{beta}: {rep.lhs.get(beta, 0)}")


if __name__ == "__main__":
    main()

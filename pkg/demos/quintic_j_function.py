"""Unstable J-function and mirror map of the quintic hybrid model.

Prints the first q-coefficients of the small J-function, the equivariant
vertex version at the single fixed point, and the mirror map, then shows
how the mirror map dies once epsilon is finite.
"""
from hybridwc.jfunctions import mu_coeff, unstable_coeff_eq, unstable_coeff_noneq
from hybridwc.state_space import sample_model


def show(label, cls):
    body = ", ".join(f"{key}: {c}" for key, c in cls.entries.items()) or "0"
    print(f"  {label:<8} {body}")


def main():
    p = sample_model("quintic")
    print("small J-function, keys (sector, H-power):")
    for beta in range(7):
        show(f"q^{beta}", unstable_coeff_noneq(beta, p))

    print("\nvertex J-function at P_1, keys (fixed point, sector):")
    for beta in (0, 1, 5):
        show(f"q^{beta}", unstable_coeff_eq(beta, 1, p))

    print("\nmirror map at epsilon = 0+:")
    for beta in range(11):
        c = mu_coeff(beta, p)
        if not c.is_zero():
            show(f"q^{beta}", c)

    q = sample_model("quintic", epsilon="1/3")
    survivors = [b for b in range(11) if not mu_coeff(b, q).is_zero()]
    print(f"\nat epsilon = 1/3 the mirror map has nonzero terms only in degrees {survivors}")


if __name__ == "__main__":
    main()

"""Edge contributions read off from football cohomology.

For one edge of two cubics in P^5 this prints the H^0 and H^1 weights of
every line bundle involved and compares the resulting Euler-class ratio
with the closed product formula.
"""
from fractions import Fraction

from hybridwc.graphs import edge_contribution, stable_edge_factor
from hybridwc.state_space import sample_model
from hybridwc.verifiers import edge_bundles, football_weights, oracle_edge_ratio


def fmt(ws):
    return "{" + ", ".join(w.to_str() for w in ws) + "}"


def main():
    p = sample_model("cubic33")
    jv, jw, beta_e, m = 1, 2, 3, Fraction(0)
    for twisted in (False, True):
        print("node-twisted" if twisted else "untwisted")
        wb, sb = edge_bundles(jv, jw, beta_e, m, p, twisted=twisted)
        h0, h1 = football_weights(wb[0])
        print(f"  L^w (one of six): degree {wb[0].coarse_degree}, H^0 {fmt(h0)}, H^1 {fmt(h1)}")
        for k, b in enumerate(sb, start=1):
            h0, _ = football_weights(b)
            print(f"  L^-d omega_log, k={k}: H^0 {fmt(h0)}")
    print("\nuntwisted ratio   ", oracle_edge_ratio(jv, jw, beta_e, m, p))
    print("strict formula    ", stable_edge_factor(jv, jw, beta_e, m, p))
    twisted = oracle_edge_ratio(jv, jw, beta_e, m, p, twisted=True) * Fraction(1, p.degree * beta_e)
    print("twisted / (d b_e) ", twisted)
    print("non-strict formula", edge_contribution(jv, jw, beta_e, m, p))


if __name__ == "__main__":
    main()

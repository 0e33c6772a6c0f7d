"""Bubble a two-sphere onto the collar of S2, print the invariants and run
the non-realizability certificate."""

import argparse

from reebring.bubbling import thm2_bubble
from reebring.catalog import Sphere
from reebring.distinguisher import product_profile, thm3_certificate
from reebring.exact_algebra import CoefficientRing
from reebring.reeb_state import special_generic_base


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r0", type=int, default=2)
    ap.add_argument("--n", type=int, default=6)
    args = ap.parse_args()

    base = special_generic_base([Sphere(2)], args.n, CoefficientRing.Z())
    state = thm2_bubble(base, 1, 2, args.r0)
    print("betti:", state.betti())
    for d in range(state.n + 1):
        if state.homology.factors(d):
            print(f"  H_{d} factors {state.homology.factors(d)}")
    print("product profile:", {k: v for k, v in product_profile(state.cohomology).items() if v})
    print("certificate:", thm3_certificate(state))


if __name__ == "__main__":
    main()

"""Classify random conjugates of order-3 elements of GL_3(Z) and list their centralizers."""

import argparse
import random

from ppcert.gl3z import CANONICAL, centralizer_enumerate, order3_normalize, random_unimodular


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    for tag, C in CANONICAL.items():
        cent = centralizer_enumerate(C)
        print(f"{tag}: centralizer order {cent.order}, cyclic {cent.is_cyclic()}")
        for _ in range(args.count):
            Q = random_unimodular(rng)
            X = Q @ C @ Q.inverse()
            cls = order3_normalize(X)
            print(f"   {[list(r) for r in X.rows]} -> {cls.tag} (verified {cls.verify()})")


if __name__ == "__main__":
    main()

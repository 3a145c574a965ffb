"""Re-run the seeded search for E, F and certify the SL_4(Z) free product with it."""

import argparse

from ppcert.matqz import charpoly
from ppcert.scenarios import Options, SearchConfig, run_scenario, search_ef


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--bound", type=int, default=3)
    args = ap.parse_args()

    E, F, cert = search_ef(SearchConfig(seed=args.seed, bound=args.bound))
    for name, m in (("E", E), ("F", F)):
        print(f"{name} = {[list(r) for r in m.rows]}")
        print(f"   charpoly {charpoly(m)}")
    print(f"search certificate: {len(cert.checks)} checks")

    result = run_scenario("thm-3-5", Options(matrices={"E": E, "F": F}))
    doc = result.document()
    print(f"\nepsilon = {doc['epsilon']}, powers = {doc['powers']}")
    print(f"{len(doc['checks'])} checks, exit code {result.exit_code}")
    print(doc["conclusion"])


if __name__ == "__main__":
    main()

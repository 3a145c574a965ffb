"""Walk through the SL_3(Z) certificate: eigen-data, powers, margins, conclusion."""

import argparse
from fractions import Fraction

from ppcert.exactnum import format_number
from ppcert.presets import PLANE
from ppcert.projdyn import analyze_proximal
from ppcert.scenarios import Options, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--epsilon", default=None, help="ball radius p/q (default: automatic)")
    args = ap.parse_args()

    for name in ("A", "B"):
        plus, minus = analyze_proximal(PLANE[name])
        print(f"{name}: lambda1 = {format_number(plus.lambda1)}")
        print(f"   P+ = {plus.attracting}   H+ = {plus.repelling}")
        print(f"   P- = {minus.attracting}   H- = {minus.repelling}")

    opts = Options(epsilon=None if args.epsilon is None else Fraction(args.epsilon))
    result = run_scenario("thm-2-2", opts)
    doc = result.document()
    print(f"\nepsilon = {doc['epsilon']}, powers = {doc['powers']}")
    for c in doc["checks"]:
        if c["kind"] == "disjointness":
            print(f"  {c['name']}: margin {c['margin']}")
    print(f"\n{len(doc['checks'])} checks, exit code {result.exit_code}")
    print(doc["conclusion"])


if __name__ == "__main__":
    main()

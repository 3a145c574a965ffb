"""Sharp 3-transitivity of PGL_2(F_q) on the projective line and the order-3 centralizer witnesses."""

import argparse

from ppcert.groupcheck import centralizer_witnesses, elements_of_order, pgl2_action, sharply_transitive_check


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=int, nargs="+", default=[3, 5, 7])
    args = ap.parse_args()

    for q in args.q:
        action = pgl2_action(q)
        rep = sharply_transitive_check(action, 3)
        g3 = elements_of_order(action, 3)
        ok = all(centralizer_witnesses(action, g).passed for g in g3)
        print(f"q = {q}: |G| = {len(action.elements)}, sharply 3-transitive {rep.passed}, "
              f"{len(g3)} elements of order 3, witnesses pass {ok}")


if __name__ == "__main__":
    main()

"""Theta along Dehn twists of g1 about delta on twice_punctured_torus(8)."""

import argparse
import logging

from jsdiff import circumference, fixtures


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=4)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    s, fam = fixtures.load("tpt8")
    steps, warns = circumference.twist_sweep(s, fam, s.curve("delta"), args.n_max)
    for w in warns:
        print("warning:", w)
    print(f"{'n':>3} {'theta':>14} {'ext1':>12} {'h2':>12} {'len':>5}")
    for st in steps:
        print(f"{st.n:3d} {st.theta:14.8g} {st.ext[0]:12.6f} {st.heights[1]:12.6f} {st.curve_length:5d}")
    if len(steps) > 1:
        print("theta(n_max) / theta(0) =", steps[-1].theta / steps[0].theta)


if __name__ == "__main__":
    main()

"""Trace the surface of circumferences of {g1, g2} on twice_punctured_torus(m).

Writes a CSV of samples and an SVG of the curve with its two flat segments,
and prints the convexity diagnostics.
"""

import argparse
import logging
from pathlib import Path

from jsdiff import builders, circumference


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-m", type=int, default=8)
    ap.add_argument("--samples", type=int, default=33)
    ap.add_argument("--refine", type=int, default=1, help="subdivision factor of the grid")
    ap.add_argument("--out", default="trace")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")

    s = builders.twice_punctured_torus(args.m).surface
    if args.refine > 1:
        s = builders.refine(s, args.refine)
    fam = s.family(["g1", "g2"])
    cur = circumference.trace(s, fam, args.samples)
    rep = circumference.convexity_report(cur)
    rep.pop("normal_angles")
    out = Path(args.out)
    out.with_suffix(".csv").write_text(circumference.trace_csv(cur))
    out.with_suffix(".svg").write_text(circumference.trace_svg(cur))
    print(f"theta = {cur.theta:.12f}")
    for k, v in rep.items():
        print(f"{k:28s} {v}")
    print("minsky", circumference.minsky_report(cur))


if __name__ == "__main__":
    main()

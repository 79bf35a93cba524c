"""Recover prescribed cylinder data on the glued genus-2 fixtures.

For each scale, solve with targets equal to the cylinder circumferences and
compare the recovered circumferences and moduli with the prescribed ones.
"""

import argparse
import time

from jsdiff import builders
from jsdiff.solver import ExtremalProblem, solve_F


def run(build, scale):
    g = build(scale)
    t = time.time()
    sol = solve_F(ExtremalProblem(g.surface, g.family, tuple(e["a"] for e in g.expected)))
    dt = time.time() - t
    rows = []
    for c, e in zip(sol.per_class, g.expected):
        rows.append((c.label, e["a"], c.a, e["M"], c.M, abs(c.M - e["M"]) / e["M"]))
    return g.surface.E, dt, rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scales", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--cone", action="store_true", help="puncture at the cone point instead")
    args = ap.parse_args()
    build = builders.genus2_cone_fixture if args.cone else builders.genus2_fixture
    for sc in args.scales:
        E, dt, rows = run(build, sc)
        print(f"scale {sc}  E={E}  {dt:.1f}s")
        for lab, a0, a, m0, m, err in rows:
            print(f"  {lab}: a {a:.12g} (want {a0:g})  M {m:.12g} (want {m0:g})  rel.err {err:.3e}")


if __name__ == "__main__":
    main()

"""Regenerate the shipped fixtures and golden reference values.

Fixtures are written from the builders; golden values come from the
brute-force reference solver (small fixtures) and from the twist sweep on
tpt8 after its segment solves have been checked against the invariants.
"""

import argparse
import json
import logging
import time
from pathlib import Path

import numpy as np

from jsdiff import builders, circumference, fixtures, oracle, report
from jsdiff.solver import ExtremalProblem, check_invariants, solve_F

DATA = Path(__file__).resolve().parents[1] / "src" / "jsdiff" / "data"
log = logging.getLogger("make_golden")


def write_fixtures():
    ga = {f"ga{m}{n}": builders.grid_annulus(m, n)[0] for m, n in ((3, 1), (4, 2), (5, 3))}
    surfaces = dict(ga)
    surfaces["tpt4"] = builders.twice_punctured_torus(4).surface
    surfaces["tpt8"] = builders.twice_punctured_torus(8).surface
    surfaces["genus2"] = builders.genus2_fixture().surface
    surfaces["genus2_cone"] = builders.genus2_cone_fixture().surface
    for name, s in surfaces.items():
        (DATA / f"{name}.json").write_text(s.dumps() + "\n")
        log.info("wrote %s (E=%d)", name, s.E)
    (DATA / "genus2_spec.json").write_text(builders.GENUS2_SPEC.to_json() + "\n")


def oracle_golden():
    out = {}
    for name in fixtures.ORACLE_SET:
        s, fam = fixtures.load(name)
        A = tuple(float(len(c)) for c in fam)
        ref = oracle.brute_solve(ExtremalProblem(s, fam, A))
        out[name] = {"targets": A, "norm": ref.norm, "rho": ref.rho.tolist(),
                     "a": ref.a.tolist(), "b": ref.b.tolist(), "M": ref.M.tolist()}
        log.info("%s: N=%.12g", name, ref.norm)
    (DATA / "golden" / "oracle.json").write_text(report.dumps(out))


def sweep_golden(n_max):
    s, fam = fixtures.load("tpt8")
    # validate the pipeline on the untwisted family first
    for A in ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0)):
        p = ExtremalProblem(s, fam, A)
        sol = solve_F(p)
        inv = check_invariants(p, sol)
        worst = max(inv.values())
        if worst > 1e-8:
            raise SystemExit(f"invariants fail at A={A}: {inv}")
    t = time.time()
    steps, warns = circumference.twist_sweep(s, fam, s.curve("delta"), n_max)
    if warns:
        raise SystemExit("; ".join(warns))
    log.info("sweep took %.1f s", time.time() - t)
    (DATA / "golden" / "twist_sweep.csv").write_text(circumference.sweep_csv(steps))
    thetas = np.array([st.theta for st in steps])
    log.info("theta: %s", thetas)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=4)
    ap.add_argument("--skip-sweep", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    (DATA / "golden").mkdir(parents=True, exist_ok=True)
    write_fixtures()
    oracle_golden()
    if not args.skip_sweep:
        sweep_golden(args.n_max)


if __name__ == "__main__":
    main()

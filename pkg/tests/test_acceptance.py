"""Acceptance gate: twelve end-to-end criteria at their stated tolerances.

Each test records one PASS/FAIL line (printed in the terminal summary, or
directly when this file is run as a script) and then asserts the outcome.
"""

import math
import time
from functools import cache

import numpy as np
import pytest

from jsdiff import builders, circumference, fixtures
from jsdiff.homotopy import check_admissible
from jsdiff.oracle import brute_solve, compare
from jsdiff.solver import (ExtremalProblem, a_star, extremal_length, scale_check, solve_F,
                           stability_probe)
from jsdiff.surface import CurveFamily

RESULTS: dict[str, str] = {}
PROPERTY_SET = ("ga31", "ga42", "ga53", "tpt4", "tpt8", "genus2")


def record(cid: str, ok: bool, detail: str):
    line = f"{cid} {'PASS' if ok else 'FAIL'}: {detail}"
    RESULTS[cid] = line
    print(line, flush=True)
    assert ok, line


def random_targets(rng, fam, k_min=0.3, k_max=2.0):
    return tuple(rng.uniform(k_min, k_max) * len(c) for c in fam)


@cache
def tpt8_trace():
    s, fam = fixtures.load("tpt8")
    t = time.time()
    cur = circumference.trace(s, fam, 33)
    return cur, time.time() - t


@cache
def tpt8_refined_trace():
    s, fam = fixtures.load("tpt8")
    r = builders.refine(s, 2)
    rfam = r.family(fam.labels)
    fam = CurveFamily(rfam.classes, check_admissible(r, rfam))
    t = time.time()
    cur = circumference.trace(r, fam, 33)
    return cur, time.time() - t


@cache
def tpt8_sweep():
    s, fam = fixtures.load("tpt8")
    t = time.time()
    steps, warns = circumference.twist_sweep(s, fam, s.curve("delta"), 4)
    return steps, warns, time.time() - t


def test_c01_oracle_equivalence():
    t = time.time()
    worst_n, worst_rho, bad = 0.0, 0.0, []
    for name in fixtures.ORACLE_SET:
        s, fam = fixtures.load(name)
        assert s.E <= 60
        targets = [tuple(float(len(c)) for c in fam),
                   tuple(float(len(c)) * (1.0 + 0.35 * j) for j, c in enumerate(fam))]
        for A in targets:
            p = ExtremalProblem(s, fam, A)
            main, ref = solve_F(p), brute_solve(p)
            cmp_ = compare(main, ref, rho_tol=1e-6, norm_rel=1e-8)
            worst_n = max(worst_n, cmp_.norm / max(1.0, ref.norm))
            worst_rho = max(worst_rho, cmp_.rho)
            if not (cmp_.norm <= 1e-8 * max(1.0, ref.norm) and cmp_.rho <= 1e-6):
                bad.append((name, A))
    dt = time.time() - t
    record("C1", not bad and dt <= 60,
           f"{len(fixtures.ORACLE_SET)} fixtures, worst |dN|/max(1,N)={worst_n:.2e}, "
           f"worst |drho|={worst_rho:.2e}, {dt:.1f}s, mismatches={bad}")


def test_c02_closed_forms():
    worst = 0.0
    for m, n in ((3, 1), (4, 2), (5, 3)):
        s, _ = builders.grid_annulus(m, n)
        fam = s.family(["core"])
        for A in (0.5, 2.0, 7.3):
            sol = solve_F(ExtremalProblem(s, fam, (A,)))
            c = sol.per_class[0]
            want = {"N": (n + 1) * A * A / m, "b": (n + 1) * A / m, "M": (n + 1) / m, "a": A}
            got = {"N": sol.norm, "b": c.b, "M": c.M, "a": c.a}
            worst = max(worst, max(abs(got[k] - want[k]) / want[k] for k in want))
    record("C2", worst <= 1e-8, f"worst relative deviation {worst:.2e} over G(3,1), G(4,2), G(5,3)")


def test_c03_scaling_law():
    rng = np.random.default_rng(11)
    worst_n, worst_rho = 0.0, 0.0
    for name in PROPERTY_SET:
        s, fam = fixtures.load(name)
        for _ in range(10):
            p = ExtremalProblem(s, fam, random_targets(rng, fam))
            for lam in (0.25, 4.0):
                r = scale_check(p, lam)
                worst_n = max(worst_n, r["norm_rel"])
                worst_rho = max(worst_rho, r["rho_rel"])
    record("C3", worst_n <= 1e-8 and worst_rho <= 1e-8,
           f"{len(PROPERTY_SET)} fixtures x 10 targets x 2 scales, worst N rel {worst_n:.2e}, "
           f"rho rel {worst_rho:.2e}")


def test_c04_degenerate_classes():
    s, fam = fixtures.load("tpt8")
    star = a_star(s, fam, [1.0])
    sols = {}
    for f in (0.0, 0.5, 1.0, 1.01, 1.5, 3.0):
        sols[f] = solve_F(ExtremalProblem(s, fam, (1.0, f * star)))
    base = sols[0.0].rho
    rho_dev = max(float(np.max(np.abs(sols[f].rho - base))) for f in (0.5, 1.0))
    M2 = [sols[f].M[1] for f in (1.01, 1.5, 3.0)]
    upper = M2[0] > 0 and all(y >= x for x, y in zip(M2, M2[1:]))
    dich = 0.0
    for sol in sols.values():
        for c in sol.per_class:
            if c.M > 0 and not c.degenerate:
                dich = max(dich, abs(c.a - c.A))
    ok = rho_dev <= 1e-9 and upper and dich <= 1e-8
    record("C4", ok, f"A*2={star:.10f}, rho deviation below A*2 {rho_dev:.2e}, "
                     f"M2 above A*2 {[f'{x:.6f}' for x in M2]}, dichotomy worst {dich:.2e}")


def test_c05_a_star_characterization():
    s, fam = fixtures.load("tpt8")
    star = a_star(s, fam, [1.0])

    def degenerate(A2):
        return solve_F(ExtremalProblem(s, fam, (1.0, A2))).degenerate[1]

    lo, hi = 0.0, 2.0 * star
    assert degenerate(lo) and not degenerate(hi)
    steps = 0
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if degenerate(mid):
            lo = mid
        else:
            hi = mid
        steps += 1
    bracket = 0.5 * (lo + hi)
    ok = abs(bracket - star) <= 1e-6 and 0 < star < math.inf
    record("C5", ok, f"a_star={star:.10f}, bisection threshold {bracket:.10f} "
                     f"(width {hi - lo:.1e}, {steps} steps), difference {abs(bracket - star):.2e}")


def test_c06_trace():
    cur, dt = tpt8_trace()
    s, fam = fixtures.load("tpt8")
    seg = cur.segments
    ext1 = extremal_length(s, fam[0])
    first = cur.samples[0]
    end_dev = max(abs(first.u[0] - ext1), abs(first.u[1]))
    # heights from independent threshold solves: (a_star / sqrt(N))^2
    h_dev = 0.0
    for k, sol in enumerate(seg.solutions):
        other = 1 - k
        partial = [1.0]
        st = a_star(s, fam, partial, k=other)
        h_ref = st * st / sol.norm
        h_dev = max(h_dev, abs(seg.heights[k] - h_ref))
    rep = circumference.convexity_report(cur)
    ok = (end_dev <= 1e-8 and h_dev <= 1e-6 and rep["half_space_ok"] and rep["subgradient_ok"]
          and rep["unit_identity_worst"] <= 1e-8 and dt <= 120)
    record("C6", ok, f"33 samples in {dt:.1f}s; endpoint dev {end_dev:.1e}, heights dev {h_dev:.1e}, "
                     f"half-space worst {rep['half_space_worst']:.1e} (tol {rep['half_space_tol']:.1e}), "
                     f"subgradient worst {rep['subgradient_worst']:.1e}, "
                     f"unit identity worst {rep['unit_identity_worst']:.1e}")


def test_c07_normal_vectors():
    cur0, _ = tpt8_trace()
    rep0 = circumference.convexity_report(cur0)
    cur1, dt1 = tpt8_refined_trace()
    rep1 = circumference.convexity_report(cur1)
    ok = rep0["normal_ok"] and rep1["normal_worst"] <= rep0["normal_worst"]
    record("C7", ok, f"worst normal angle {rep0['normal_worst']:.4f} rad over "
                     f"{len(rep0['normal_angles'])} interior samples; level-1 rerun "
                     f"{rep1['normal_worst']:.4f} rad ({dt1:.0f}s)")


def test_c08_minsky():
    cur, _ = tpt8_trace()
    rep = circumference.minsky_report(cur, slack=1e-8)
    steps, _, _ = tpt8_sweep()
    sweep_bad = sum(not st.minsky_ok for st in steps)
    ok = rep["violations"] == 0 and sweep_bad == 0
    record("C8", ok, f"trace violations {rep['violations']} (worst excess {rep['worst_excess']:.2e}), "
                     f"sweep violations {sweep_bad} over {len(steps)} steps")


def test_c09_twist_sweep():
    steps, warns, dt = tpt8_sweep()
    th = [st.theta for st in steps]
    gold_lines = [ln for ln in fixtures.golden("twist_sweep.csv").splitlines()[1:] if ln]
    gold = [float(ln.split(",")[1]) for ln in gold_lines]
    gold_dev = max(abs(a - b) / b for a, b in zip(th, gold)) if len(gold) == len(th) else math.inf
    decreasing = all(b < a for a, b in zip(th, th[1:]))
    ok = (not warns and len(th) == 5 and decreasing and th[4] <= th[0] / 2
          and gold_dev <= 1e-8 and dt <= 600)
    record("C9", ok, f"theta n=0..4 {[f'{x:.6g}' for x in th]}, golden deviation {gold_dev:.1e}, "
                     f"{dt:.0f}s")


def _relabel_random(rng, s):
    vperm = rng.permutation(s.vertex_count).tolist()
    eperm = rng.permutation(s.E).tolist()
    return s.relabel(vperm, eperm), eperm


def test_c10_invariance():
    rng = np.random.default_rng(5)
    worst = 0.0
    for name in PROPERTY_SET:
        s, fam = fixtures.load(name)
        A = random_targets(rng, fam)
        ref = solve_F(ExtremalProblem(s, fam, A))
        for _ in range(20):
            r, eperm = _relabel_random(rng, s)
            rfam = CurveFamily(tuple(r.curve(c.label) for c in fam), fam.certificate)
            sol = solve_F(ExtremalProblem(r, rfam, A))
            back = sol.rho[np.asarray(eperm)]
            dev = max(float(np.max(np.abs(back - ref.rho))), abs(sol.norm - ref.norm),
                      *(float(np.max(np.abs(x - y))) for x, y in
                        ((sol.a, ref.a), (sol.b, ref.b), (sol.M, ref.M))))
            if sol.degenerate != ref.degenerate:
                dev = math.inf
            worst = max(worst, dev)
    record("C10", worst <= 1e-10, f"{len(PROPERTY_SET)} fixtures x 20 relabelings, worst deviation {worst:.2e}")


def _forward_error(g):
    sol = solve_F(ExtremalProblem(g.surface, g.family, tuple(e["a"] for e in g.expected)))
    errs = []
    for c, e in zip(sol.per_class, g.expected):
        errs += [abs(c.a - e["a"]) / e["a"], abs(c.M - e["M"]) / e["M"]]
    return max(errs), sol


def test_c11_forward_model():
    e0, _ = _forward_error(builders.genus2_fixture(1))
    e1, _ = _forward_error(builders.genus2_fixture(2))
    # the cone-point variant carries a genuine discretization error; its trend is reported
    c0, _ = _forward_error(builders.genus2_cone_fixture(1))
    c1, _ = _forward_error(builders.genus2_cone_fixture(2))
    ok = e0 <= 0.10 and e1 < e0
    record("C11", ok, f"genus-2 relative error base {e0:.3e}, x2 refined {e1:.3e}; "
                      f"cone-point variant {c0:.3f} -> {c1:.3f}")


def test_c12_stability():
    rng = np.random.default_rng(17)
    violations, probes, worst_ratio = 0, 0, 0.0
    for name in PROPERTY_SET:
        s, fam = fixtures.load(name)
        A = np.array(random_targets(rng, fam))
        p = ExtremalProblem(s, fam, tuple(A))
        base = solve_F(p)
        for _ in range(100):
            dA = rng.uniform(-0.1, 0.1, len(fam)) * A
            r = stability_probe(p, dA, base=base)
            probes += 1
            violations += not r["ok"]
            if r["bound"] > 0:
                worst_ratio = max(worst_ratio, r["norm_change"] / r["bound"])
    record("C12", violations == 0, f"{probes} probes, {violations} violations, "
                                   f"max |dN|/bound {worst_ratio:.3f}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))

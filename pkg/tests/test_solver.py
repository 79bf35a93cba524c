import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jsdiff import builders, fixtures
from jsdiff.homotopy import AdmissibilityError
from jsdiff.solver import (ExtremalProblem, SolverConfig, a_star, check_invariants, extremal_length,
                           scale_check, solve_F, solve_restricted, stability_probe)
from jsdiff.surface import CurveFamily


def test_restricted_qp_matches_closed_form():
    # min |x|^2 s.t. x0 + x1 >= 2, x1 >= 3
    C = np.array([[1.0, 1.0], [0.0, 1.0]])
    rho, lam = solve_restricted(C, np.array([2.0, 3.0]))
    assert rho == pytest.approx([0.0, 3.0], abs=1e-12)
    assert lam == pytest.approx([0.0, 6.0], abs=1e-10)


@pytest.mark.parametrize("m,n", [(3, 1), (4, 2), (5, 3)])
def test_grid_annulus_closed_form(m, n):
    s, _ = builders.grid_annulus(m, n)
    fam = s.family(["core"])
    sol = solve_F(ExtremalProblem(s, fam, (2.0,)))
    assert sol.norm == pytest.approx((n + 1) * 4 / m, rel=1e-12)
    assert sol.b[0] == pytest.approx((n + 1) * 2 / m, rel=1e-12)
    assert not sol.degenerate[0]


def test_zero_targets(tpt4):
    s, fam = tpt4
    sol = solve_F(ExtremalProblem(s, fam, (0.0, 0.0)))
    assert sol.norm == 0 and not sol.rho.any()
    assert all(sol.degenerate)


def test_invariants_tpt8(tpt8):
    s, fam = tpt8
    p = ExtremalProblem(s, fam, (1.0, 0.7))
    sol = solve_F(p)
    inv = check_invariants(p, sol)
    for k, v in inv.items():
        assert v <= 1e-8, k
    assert sol.norm == pytest.approx(float(np.array(p.targets) @ sol.b), rel=1e-10)


def test_degenerate_class_below_threshold(tpt8):
    s, fam = tpt8
    astar = a_star(s, fam, [1.0])
    assert 0 < astar < np.inf
    sol = solve_F(ExtremalProblem(s, fam, (1.0, 0.5 * astar)))
    assert sol.degenerate == [False, True]
    assert sol.a[1] == pytest.approx(astar, rel=1e-9)


def test_extremal_length_annulus():
    s, c = builders.grid_annulus(4, 2)
    assert extremal_length(s, c) == pytest.approx(4 / 3, rel=1e-12)


def test_bad_targets(tpt4):
    s, fam = tpt4
    with pytest.raises(ValueError):
        ExtremalProblem(s, fam, (1.0,))
    with pytest.raises(ValueError):
        ExtremalProblem(s, fam, (1.0, -1.0))


def test_inadmissible_family_rejected(tpt4):
    s, fam = tpt4
    with pytest.raises(AdmissibilityError):
        solve_F(ExtremalProblem(s, CurveFamily((fam[0], fam[0])), (1.0, 1.0)))


def test_config_cut_limit(tpt8):
    from jsdiff.solver import SolverError
    s, fam = tpt8
    with pytest.raises(SolverError):
        solve_F(ExtremalProblem(s, fam, (1.0, 1.0)), SolverConfig(max_cuts=1))


def test_scale_and_stability(tpt4):
    s, fam = tpt4
    p = ExtremalProblem(s, fam, (1.0, 2.0))
    r = scale_check(p, 4.0)
    assert r["norm_rel"] < 1e-10 and r["rho_rel"] < 1e-8
    pr = stability_probe(p, [0.05, -0.1])
    assert pr["ok"]


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.floats(0.0, 1.0))
def test_norm_monotone_in_targets(a1, a2, t):
    s, fam = fixtures.load("tpt4")
    n0 = solve_F(ExtremalProblem(s, fam, (a1, a2))).norm
    n1 = solve_F(ExtremalProblem(s, fam, (a1 + t, a2))).norm
    assert n1 >= n0 - 1e-9 * max(1.0, n0)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.floats(0.2, 5.0))
def test_norm_homogeneous(a1, a2, t):
    s, fam = fixtures.load("tpt4")
    n0 = solve_F(ExtremalProblem(s, fam, (a1, a2))).norm
    n1 = solve_F(ExtremalProblem(s, fam, (t * a1, t * a2))).norm
    assert n1 == pytest.approx(t * t * n0, rel=1e-9)

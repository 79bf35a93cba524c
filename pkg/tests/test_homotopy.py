import numpy as np
import pytest

from jsdiff import builders, fixtures
from jsdiff.homotopy import (AdmissibilityError, Verdict, are_homotopic, canonical_rotation,
                             check_admissible, dehn_twist, is_essential, is_peripheral,
                             reduce_walk, shortest_homotopic_cycle)
from jsdiff.surface import CurveClass, CurveFamily


def unit(s):
    return np.ones(s.E)


def test_reduce_and_rotate():
    assert reduce_walk((2, 4, 5, 6)) == (2, 6)
    assert reduce_walk((3, 4, 2)) == (4,)
    assert canonical_rotation((8, 2, 6)) == canonical_rotation((2, 6, 8))


def test_torus_shortest_cycles():
    s = builders.torus_grid(4)
    assert shortest_homotopic_cycle(s, unit(s), s.curve("h0")).length == pytest.approx(4)
    diag = builders.torus_diagonal(4)
    assert shortest_homotopic_cycle(s, unit(s), diag).length == pytest.approx(8)


def test_weights_reroute_cycle():
    s = builders.torus_grid(4)
    rho = unit(s)
    h0 = s.curve("h0")
    rho[np.asarray(h0.darts) // 2] = 5.0
    res = shortest_homotopic_cycle(s, rho, h0)
    assert res.length == pytest.approx(4)
    assert are_homotopic(s, CurveClass(res.darts), h0) is Verdict.YES


def test_annulus_core_length(ga42):
    s, fam = ga42
    assert shortest_homotopic_cycle(s, unit(s), fam[0]).length == pytest.approx(4)


def test_verdicts(tpt8):
    s, fam = tpt8
    g1, g2 = fam
    assert is_essential(s, g1) is Verdict.YES
    assert is_peripheral(s, g1) is Verdict.NO
    assert are_homotopic(s, g1, g2) is Verdict.NO
    assert are_homotopic(s, g1, g1.reversed()) is Verdict.YES
    assert are_homotopic(s, g1, g1.reversed(), oriented=True) is Verdict.NO


def test_check_admissible_rejects_duplicates(tpt8):
    s, fam = tpt8
    with pytest.raises(AdmissibilityError) as ei:
        check_admissible(s, CurveFamily((fam[0], fam[0])))
    assert "homotopic" in ei.value.condition


def test_check_admissible_rejects_peripheral():
    s = builders.torus_grid(4, marked=[(0, 0)])
    g = builders._Grid(4, 4, cyclic_y=True)
    # boundary of the 2x2 block centred on the puncture
    loop = (g.h(-1, -1), g.h(0, -1), g.vert(1, -1), g.vert(1, 0),
            g.h(0, 1, False), g.h(-1, 1, False), g.vert(-1, 0, False), g.vert(-1, -1, False))
    fam = CurveFamily((CurveClass(loop, "p"),))
    with pytest.raises(AdmissibilityError):
        check_admissible(s, fam)


def test_dehn_twist_lengths(tpt8):
    s, fam = tpt8
    delta = s.curve("delta")
    lengths = [shortest_homotopic_cycle(s, unit(s), dehn_twist(s, fam[0], delta, n)).length
               for n in range(3)]
    assert lengths == pytest.approx([8, 40, 72])


def test_dehn_twist_composes(tpt8):
    s, fam = tpt8
    delta = s.curve("delta")
    t2 = dehn_twist(s, fam[0], delta, 2)
    t11 = dehn_twist(s, dehn_twist(s, fam[0], delta, 1), delta, 1)
    assert are_homotopic(s, t2, t11) is Verdict.YES


def test_twist_about_disjoint_curve_is_trivial(tpt8):
    s, fam = tpt8
    t = dehn_twist(s, fam[1], s.curve("delta"), 3)
    assert are_homotopic(s, t, fam[1]) is Verdict.YES


def test_torus_twist_of_meridian():
    s = builders.torus_grid(4)
    t = dehn_twist(s, s.curve("h0"), s.curve("v0"), 1)
    assert are_homotopic(s, t, builders.torus_diagonal(4)) is Verdict.YES

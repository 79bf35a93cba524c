import math

import numpy as np
import pytest

from jsdiff import circumference as cf


def test_theta_from_symmetric():
    # equal segments at 45 degrees minus equal offsets
    th = cf.theta_from(1.0, 1.0, 0.0, 0.0)
    assert th == pytest.approx(math.pi / 2)
    assert cf.theta_from(2.0, 2.0, 2.0, 2.0) == pytest.approx(0.0, abs=1e-15)


def test_sample_angles():
    a = cf.sample_angles(5)
    assert a[0] == 0 and a[-1] == pytest.approx(math.pi / 2)
    assert np.all(np.diff(a) > 0)
    with pytest.raises(ValueError):
        cf.sample_angles(1)


@pytest.fixture(scope="module")
def curve4(tpt4):
    s, fam = tpt4
    return cf.trace(s, fam, 9)


def test_trace_unit_identity(curve4):
    for x in curve4.samples:
        assert abs(x.unit_identity - 1) <= 1e-8


def test_trace_endpoints_hit_segments(curve4):
    seg = curve4.segments
    first, last = curve4.samples[0], curve4.samples[-1]
    assert first.u[0] == pytest.approx(seg.ext[0], rel=1e-8) and first.u[1] == 0
    assert last.u[1] == pytest.approx(seg.ext[1], rel=1e-8) and last.u[0] == 0


def test_convexity_and_minsky(curve4):
    rep = cf.convexity_report(curve4)
    assert rep["half_space_ok"] and rep["subgradient_ok"] and rep["degenerate_flags_consistent"]
    assert rep["unit_identity_worst"] <= 1e-8
    assert cf.minsky_report(curve4)["violations"] == 0


def test_csv_and_svg(curve4):
    text = cf.trace_csv(curve4)
    lines = text.strip().splitlines()
    assert lines[0].startswith("theta,u1,u2") and len(lines) == 10
    svg = cf.trace_svg(curve4)
    assert svg.startswith("<svg") and "polyline" in svg


def test_pair_required(ga42):
    s, fam = ga42
    with pytest.raises(ValueError):
        cf.segments(s, fam)

import pytest

from jsdiff import builders
from jsdiff.homotopy import check_admissible
from jsdiff.surface import SurfaceError


def test_twice_punctured_torus_twister_rules():
    assert builders.twice_punctured_torus(8).twister is not None
    assert builders.twice_punctured_torus(4).twister is None
    with pytest.raises(ValueError):
        builders.twice_punctured_torus(5)


def test_genus2_fixture_matches_spec():
    g = builders.genus2_fixture()
    rep = g.surface.validate()
    assert (rep.genus, rep.punctures, rep.E) == (2, 1, 44)
    assert [e["M"] for e in g.expected] == [0.75, 0.5]
    check_admissible(g.surface, g.family)


def test_spec_scaling_and_json():
    spec = builders.GENUS2_SPEC
    assert builders.CylinderSpec.from_json(spec.to_json()) == spec
    s2 = builders.glue_cylinders(spec.scaled(2))
    assert s2.expected[0]["a"] == 8.0 and s2.surface.validate().genus == 2


def test_glue_rejects_tiny_cylinders():
    with pytest.raises(SurfaceError):
        builders.glue_cylinders(builders.CylinderSpec([(2, 1)], []))


def test_refine_preserves_topology(tpt4):
    s, _ = tpt4
    r = builders.refine(s, 2)
    assert r.E == 4 * s.E
    a, b = s.validate(), r.validate()
    assert (a.genus, a.punctures) == (b.genus, b.punctures)
    assert len(r.curve("g1")) == 2 * len(s.curve("g1"))

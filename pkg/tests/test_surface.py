import json

import pytest

from jsdiff import builders, fixtures
from jsdiff.surface import (CurveClass, SurfaceError, SurfaceParseError, dart_to_signed, from_faces,
                            loads, signed_to_dart)


def test_signed_ids_round_trip():
    for s in (1, -1, 7, -12):
        assert dart_to_signed(signed_to_dart(s)) == s
    with pytest.raises(ValueError):
        signed_to_dart(0)


@pytest.mark.parametrize("name,genus,punct", [
    ("tpt4", 1, 2), ("tpt8", 1, 2), ("genus2", 2, 1), ("genus2_cone", 2, 1),
])
def test_fixture_topology(name, genus, punct):
    s, _ = fixtures.load(name)
    rep = s.validate()
    assert (rep.genus, rep.punctures) == (genus, punct)
    assert rep.chi == 2 - 2 * genus  # marked vertices stay in the vertex count
    assert rep.complexity == 3 * genus - 3 + punct
    assert rep.ok


def test_grid_annulus_counts():
    s, core = builders.grid_annulus(5, 3)
    rep = s.validate()
    assert (rep.V, rep.E, rep.F) == (20, 35, 15)
    assert rep.boundaries == 2 and rep.genus == 0
    assert len(core) == 5


def test_round_trip_json():
    s, _ = fixtures.load("genus2")
    t = loads(s.dumps())
    assert t == s
    assert t.curve("c0").darts == s.curve("c0").darts


def test_unknown_keys_ignored():
    s, _ = fixtures.load("ga31")
    doc = s.to_dict()
    doc["provenance"] = {"tool": "x"}
    assert loads(json.dumps(doc)) == s


@pytest.mark.parametrize("text", ["[1, 2]", "{not json", '{"edges": []}'])
def test_parse_errors(text):
    with pytest.raises(SurfaceParseError):
        loads(text)


def test_rejects_bad_rotation():
    s, _ = fixtures.load("ga31")
    doc = s.to_dict()
    doc["rotation"][0] = doc["rotation"][0][:-1]
    with pytest.raises(SurfaceError):
        loads(json.dumps(doc))


def test_rejects_walk_through_marked_vertex():
    s, _ = fixtures.load("tpt8")
    g = builders._Grid(8, 8, cyclic_y=True)
    through = CurveClass(g.ring(2).darts, "bad")  # row 2 holds a puncture
    with pytest.raises(SurfaceError):
        s.check_walk(through.darts)


def test_relabel_is_isomorphism():
    s, _ = fixtures.load("tpt4")
    vperm = list(reversed(range(s.vertex_count)))
    eperm = [(e + 5) % s.E for e in range(s.E)]
    t = s.relabel(vperm, eperm)
    assert t.validate() == s.validate()
    assert len(t.faces) == len(s.faces)
    with pytest.raises(SurfaceError):
        s.relabel(vperm, [0] * s.E)


def test_from_faces_triangle_sphere():
    # boundary of a triangle: two faces glued along three edges
    s = from_faces(3, [(0, 1), (1, 2), (2, 0)], [[0, 2, 4], [5, 3, 1]])
    rep = s.validate()
    assert rep.genus == 0 and rep.chi == 2

"""Shipped fixture surfaces and golden reference values."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .homotopy import check_admissible
from .surface import CombinatorialSurface, CurveFamily, loads


@dataclass(frozen=True)
class Fixture:
    name: str
    family: tuple[str, ...]
    description: str


FIXTURES = {
    "ga31": Fixture("ga31", ("core",), "grid annulus G(3,1)"),
    "ga42": Fixture("ga42", ("core",), "grid annulus G(4,2)"),
    "ga53": Fixture("ga53", ("core",), "grid annulus G(5,3)"),
    "tpt4": Fixture("tpt4", ("g1", "g2"), "twice punctured torus, 4x4 grid"),
    "tpt8": Fixture("tpt8", ("g1", "g2"), "twice punctured torus, 8x8 grid, with twister delta"),
    "genus2": Fixture("genus2", ("c0", "c1"), "genus-2 surface from two glued cylinders, one face puncture"),
    "genus2_cone": Fixture("genus2_cone", ("c0", "c1"), "same genus-2 surface punctured at the cone point"),
}

# fixtures small enough for the brute-force reference solver
ORACLE_SET = ("ga31", "ga42", "ga53", "tpt4", "genus2")


def _data(name: str):
    return resources.files("jsdiff").joinpath("data", name)


def load(name: str) -> tuple[CombinatorialSurface, CurveFamily]:
    """Surface and its default curve family."""
    try:
        fx = FIXTURES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}") from None
    s = loads(_data(f"{name}.json").read_text())
    fam = s.family(fx.family)
    if not s.boundary_faces:
        fam = CurveFamily(fam.classes, check_admissible(s, fam))
    return s, fam


def golden(name: str):
    text = _data(f"golden/{name}").read_text()
    return json.loads(text) if name.endswith(".json") else text

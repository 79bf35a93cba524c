"""Combinatorial surfaces given by rotation systems.

An edge ``e = (u, v)`` has two edge-ends (darts): ``2*e`` leaves ``u`` and
``2*e + 1`` leaves ``v``.  ``rotation[v]`` lists the darts leaving ``v`` in
cyclic order.  Faces are the orbits of ``h -> succ(twin(h))``.

Curves are written as lists of signed, 1-based edge ids: ``+(e+1)`` walks
edge ``e`` from ``u`` to ``v`` and ``-(e+1)`` walks it backwards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence


class SurfaceError(ValueError):
    """Malformed or structurally inconsistent surface data."""


class SurfaceParseError(SurfaceError):
    pass


def dart_tail(edges, h):
    e, side = divmod(h, 2)
    return edges[e][side]


def dart_head(edges, h):
    e, side = divmod(h, 2)
    return edges[e][1 - side]


def signed_to_dart(s: int) -> int:
    if s == 0:
        raise SurfaceError("signed edge ids are 1-based; 0 is not allowed")
    return 2 * (s - 1) if s > 0 else 2 * (-s - 1) + 1


def dart_to_signed(h: int) -> int:
    e, side = divmod(h, 2)
    return e + 1 if side == 0 else -(e + 1)


@dataclass(frozen=True)
class CurveClass:
    """A closed walk (tuple of darts) standing for its free homotopy class."""

    darts: tuple[int, ...]
    label: str = ""

    def signed(self) -> list[int]:
        return [dart_to_signed(h) for h in self.darts]

    @classmethod
    def from_signed(cls, ids: Iterable[int], label: str = "") -> "CurveClass":
        return cls(tuple(signed_to_dart(s) for s in ids), label)

    def reversed(self) -> "CurveClass":
        return CurveClass(tuple(h ^ 1 for h in reversed(self.darts)), self.label)

    def edge_counts(self, n_edges: int):
        import numpy as np

        counts = np.zeros(n_edges)
        for h in self.darts:
            counts[h // 2] += 1
        return counts

    def __len__(self) -> int:
        return len(self.darts)


@dataclass(frozen=True)
class CurveFamily:
    classes: tuple[CurveClass, ...]
    certificate: dict | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    def __getitem__(self, i):
        return self.classes[i]

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.classes]


@dataclass(frozen=True)
class TopologyReport:
    V: int
    E: int
    F: int
    chi: int
    genus: int
    punctures: int
    boundaries: int
    orientable: bool
    complexity: int
    ok: bool
    warnings: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class CombinatorialSurface:
    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    rotation: tuple[tuple[int, ...], ...]
    marked: frozenset[int] = frozenset()
    boundary_faces: frozenset[int] = frozenset()
    curves: Mapping[str, CurveClass] = field(default_factory=dict)

    def __post_init__(self):
        self._check()

    # -- structure -------------------------------------------------------
    def _check(self) -> None:
        V, E = self.vertex_count, len(self.edges)
        if len(self.rotation) != V:
            raise SurfaceError(f"rotation has {len(self.rotation)} entries, expected {V}")
        for e, (u, v) in enumerate(self.edges):
            if not (0 <= u < V and 0 <= v < V):
                raise SurfaceError(f"edge {e} has endpoint out of range")
        seen = {}
        for v, ring in enumerate(self.rotation):
            for h in ring:
                if not 0 <= h < 2 * E:
                    raise SurfaceError(f"edge-end {h} at vertex {v} out of range")
                if h in seen:
                    raise SurfaceError(f"edge-end {h} appears twice in rotation")
                if dart_tail(self.edges, h) != v:
                    raise SurfaceError(f"edge-end {h} listed at vertex {v} but belongs to "
                                       f"vertex {dart_tail(self.edges, h)}")
                seen[h] = v
        missing = [h for h in range(2 * E) if h not in seen]
        if missing:
            raise SurfaceError(f"dangling edge-ends (absent from every rotation): {missing}")
        for m in self.marked:
            if not 0 <= m < V:
                raise SurfaceError(f"marked vertex {m} out of range")
            if not self.rotation[m]:
                raise SurfaceError(f"marked vertex {m} has valence 0")
        for f in self.boundary_faces:
            if not 0 <= f < len(self.faces):
                raise SurfaceError(f"boundary face {f} out of range")
        for label, c in self.curves.items():
            self.check_walk(c.darts, label)

    def check_walk(self, darts: Sequence[int], label: str = "") -> None:
        if not darts:
            raise SurfaceError(f"curve {label!r} is empty")
        for i, h in enumerate(darts):
            if not 0 <= h < 2 * len(self.edges):
                raise SurfaceError(f"curve {label!r} uses unknown edge")
            nxt = darts[(i + 1) % len(darts)]
            if dart_head(self.edges, h) != dart_tail(self.edges, nxt):
                raise SurfaceError(f"curve {label!r} is not a closed walk at step {i}")
            if dart_tail(self.edges, h) in self.marked:
                raise SurfaceError(f"curve {label!r} visits marked vertex "
                                   f"{dart_tail(self.edges, h)}")

    @property
    def E(self) -> int:
        return len(self.edges)

    @cached_property
    def succ(self) -> dict[int, int]:
        out = {}
        for ring in self.rotation:
            for i, h in enumerate(ring):
                out[h] = ring[(i + 1) % len(ring)]
        return out

    @cached_property
    def faces(self) -> tuple[tuple[int, ...], ...]:
        """Face boundaries as dart cycles, ordered by their smallest dart."""
        succ = self.succ
        seen = set()
        faces = []
        for h0 in range(2 * self.E):
            if h0 in seen:
                continue
            cyc = []
            h = h0
            while h not in seen:
                seen.add(h)
                cyc.append(h)
                h = succ[h ^ 1]
            if h != h0:
                raise SurfaceError("face tracing did not close")
            faces.append(tuple(cyc))
        return tuple(faces)

    @cached_property
    def face_of_dart(self) -> dict[int, int]:
        return {h: i for i, f in enumerate(self.faces) for h in f}

    def tail(self, h: int) -> int:
        return dart_tail(self.edges, h)

    def head(self, h: int) -> int:
        return dart_head(self.edges, h)

    def curve(self, label: str) -> CurveClass:
        try:
            return self.curves[label]
        except KeyError:
            raise KeyError(f"no curve labelled {label!r}; have {sorted(self.curves)}") from None

    def family(self, labels: Sequence[str]) -> CurveFamily:
        return CurveFamily(tuple(self.curve(lab) for lab in labels))

    def with_curves(self, curves: Mapping[str, CurveClass]) -> "CombinatorialSurface":
        merged = dict(self.curves)
        merged.update(curves)
        return CombinatorialSurface(self.vertex_count, self.edges, self.rotation,
                                    self.marked, self.boundary_faces, merged)

    # -- topology --------------------------------------------------------
    def validate(self) -> TopologyReport:
        V, E = self.vertex_count, self.E
        F_all = len(self.faces)
        b = len(self.boundary_faces)
        F = F_all - b
        chi = V - E + F
        n = len(self.marked)
        warnings = []
        # rotation systems always describe orientable surfaces
        orientable = True
        closed_chi = V - E + F_all
        if closed_chi % 2:
            raise SurfaceError("odd Euler characteristic on closed mesh; not orientable")
        genus = (2 - closed_chi) // 2
        comps = self._components()
        if comps != 1:
            warnings.append(f"surface has {comps} connected components")
        complexity = 3 * genus - 3 + n + b
        if b:
            warnings.append(f"bordered fixture: {b} boundary component(s) counted as punctures")
        if complexity <= 0:
            warnings.append(f"3g-3+n = {complexity}: no admissible curve family exists")
        return TopologyReport(V, E, F, chi, genus, n, b, orientable, complexity,
                              complexity > 0, tuple(warnings))

    def _components(self) -> int:
        parent = list(range(self.vertex_count))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self.edges:
            parent[find(u)] = find(v)
        return len({find(x) for x in range(self.vertex_count)})

    # -- relabelling -----------------------------------------------------
    def relabel(self, vperm: Sequence[int], eperm: Sequence[int]) -> "CombinatorialSurface":
        """Isomorphic copy: old vertex ``v`` becomes ``vperm[v]``, old edge ``e`` becomes ``eperm[e]``."""
        V, E = self.vertex_count, self.E
        if sorted(vperm) != list(range(V)) or sorted(eperm) != list(range(E)):
            raise SurfaceError("permutations must be bijections")
        edges = [None] * E
        for e, (u, v) in enumerate(self.edges):
            edges[eperm[e]] = (vperm[u], vperm[v])
        rotation = [None] * V
        for v, ring in enumerate(self.rotation):
            rotation[vperm[v]] = tuple(map_dart(h, eperm) for h in ring)
        bdarts = [self.faces[f][0] for f in self.boundary_faces]
        curves = {lab: CurveClass(tuple(map_dart(h, eperm) for h in c.darts), c.label)
                  for lab, c in self.curves.items()}
        out = CombinatorialSurface(V, tuple(edges), tuple(rotation),
                                   frozenset(vperm[m] for m in self.marked), frozenset(), curves)
        bf = frozenset(out.face_of_dart[map_dart(h, eperm)] for h in bdarts)
        return CombinatorialSurface(V, tuple(edges), tuple(rotation), out.marked, bf, curves)

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "vertices": self.vertex_count,
            "edges": [list(e) for e in self.edges],
            "rotation": [list(r) for r in self.rotation],
            "marked": sorted(self.marked),
            "boundary_faces": sorted(self.boundary_faces),
            "curves": {lab: c.signed() for lab, c in self.curves.items()},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def __eq__(self, other):
        if not isinstance(other, CombinatorialSurface):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(self.dumps())


def map_dart(h: int, eperm: Sequence[int]) -> int:
    return 2 * eperm[h // 2] + (h & 1)


def from_dict(doc: Mapping) -> CombinatorialSurface:
    try:
        V = int(doc["vertices"])
        edges = tuple((int(u), int(v)) for u, v in doc["edges"])
        rotation = tuple(tuple(int(h) for h in r) for r in doc["rotation"])
        marked = frozenset(int(m) for m in doc.get("marked", []))
        bf = frozenset(int(f) for f in doc.get("boundary_faces", []))
        curves_raw = doc.get("curves", {})
        curves = {str(lab): CurveClass.from_signed([int(s) for s in ids], str(lab))
                  for lab, ids in curves_raw.items()}
    except SurfaceError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SurfaceParseError(f"malformed surface document: {exc!r}") from exc
    if len(marked) != len(doc.get("marked", [])):
        raise SurfaceError("marked vertices must be pairwise distinct")
    return CombinatorialSurface(V, edges, rotation, marked, bf, curves)


def loads(text: str) -> CombinatorialSurface:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SurfaceParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SurfaceParseError("surface document must be a JSON object")
    return from_dict(doc)


def load_surface(path) -> CombinatorialSurface:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def from_faces(vertex_count: int, edges: Sequence[tuple[int, int]],
               faces: Sequence[Sequence[int]], marked=(), boundary=(),
               curves: Mapping[str, CurveClass] | None = None) -> CombinatorialSurface:
    """Build a surface from oriented face boundaries given as dart cycles.

    ``boundary`` lists indices into ``faces`` that are holes.  Each dart must
    lie on exactly one face.
    """
    succ = {}
    for f in faces:
        k = len(f)
        for i in range(k):
            a = f[i] ^ 1
            if a in succ:
                raise SurfaceError(f"dart {a} is followed twice; faces overlap")
            succ[a] = f[(i + 1) % k]
    E = len(edges)
    if len(succ) != 2 * E:
        raise SurfaceError("faces do not cover every edge-end exactly once")
    rotation = [[] for _ in range(vertex_count)]
    seen = set()
    for h0 in range(2 * E):
        if h0 in seen:
            continue
        v = dart_tail(edges, h0)
        ring = []
        h = h0
        while h not in seen:
            seen.add(h)
            ring.append(h)
            h = succ[h]
        if rotation[v]:
            raise SurfaceError(f"vertex {v} link is not a single cycle")
        rotation[v] = ring
    # canonical start: smallest dart first
    rotation = [tuple(r[r.index(min(r)):] + r[:r.index(min(r))]) if r else () for r in rotation]
    provisional = CombinatorialSurface(vertex_count, tuple(map(tuple, edges)), tuple(rotation),
                                       frozenset(marked), frozenset(), dict(curves or {}))
    bf = frozenset(provisional.face_of_dart[faces[i][0]] for i in boundary)
    return CombinatorialSurface(vertex_count, tuple(map(tuple, edges)), tuple(rotation),
                                frozenset(marked), bf, dict(curves or {}))

"""Test surfaces: grid annuli, punctured tori, glued cylinders, refinement."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .surface import CombinatorialSurface, CurveClass, CurveFamily, SurfaceError, from_faces


class _Grid:
    """Vertex/edge bookkeeping for an ``mx`` x (rows) quad grid, cyclic in x."""

    def __init__(self, mx: int, levels: int, cyclic_y: bool):
        self.mx, self.levels, self.cyclic_y = mx, levels, cyclic_y
        self.edges: list[tuple[int, int]] = []
        self.hid = {}
        self.vid = {}
        for j in range(levels):
            for i in range(mx):
                self.hid[i, j] = len(self.edges)
                self.edges.append((self.v(i, j), self.v(i + 1, j)))
        vrows = levels if cyclic_y else levels - 1
        for j in range(vrows):
            for i in range(mx):
                self.vid[i, j] = len(self.edges)
                self.edges.append((self.v(i, j), self.v(i, j + 1)))

    def v(self, i, j):
        return (j % self.levels) * self.mx + (i % self.mx)

    def h(self, i, j, fwd=True):
        d = 2 * self.hid[i % self.mx, j % self.levels]
        return d if fwd else d + 1

    def vert(self, i, j, fwd=True):
        d = 2 * self.vid[i % self.mx, j % self.levels]
        return d if fwd else d + 1

    def quad(self, i, j):
        return [self.h(i, j), self.vert(i + 1, j), self.h(i, j + 1, False), self.vert(i, j, False)]

    def ring(self, j):
        return CurveClass(tuple(self.h(i, j) for i in range(self.mx)))


def grid_annulus(m: int, n: int) -> tuple[CombinatorialSurface, CurveClass]:
    """Bordered annulus: ``m`` columns (cyclic), ``n`` rows, ``n+1`` rings."""
    if m < 3:
        raise ValueError("grid annulus needs m >= 3")
    if n < 1:
        raise ValueError("grid annulus needs n >= 1")
    g = _Grid(m, n + 1, cyclic_y=False)
    faces = [g.quad(i, j) for j in range(n) for i in range(m)]
    faces.append([g.h(i, 0, False) for i in reversed(range(m))])
    faces.append([g.h(i, n) for i in range(m)])
    core = CurveClass(g.ring(0).darts, "core")
    curves = {"core": core}
    for j in range(n + 1):
        curves[f"ring{j}"] = CurveClass(g.ring(j).darts, f"ring{j}")
    s = from_faces(m * (n + 1), g.edges, faces, boundary=[len(faces) - 2, len(faces) - 1], curves=curves)
    return s, s.curve("core")


def torus_grid(mx: int, my: int | None = None, marked: Sequence[tuple[int, int]] = ()) -> CombinatorialSurface:
    """``mx`` x ``my`` quad grid on the torus; curves ``h{j}`` and ``v{i}``."""
    my = my or mx
    if mx < 3 or my < 3:
        raise ValueError("torus grid needs at least 3 columns and rows")
    g = _Grid(mx, my, cyclic_y=True)
    faces = [g.quad(i, j) for j in range(my) for i in range(mx)]
    curves = {}
    mk = {g.v(i, j) for i, j in marked}
    for j in range(my):
        c = g.ring(j)
        if not any(g.v(i, j) in mk for i in range(mx)):
            curves[f"h{j}"] = CurveClass(c.darts, f"h{j}")
    for i in range(mx):
        if not any(g.v(i, j) in mk for j in range(my)):
            curves[f"v{i}"] = CurveClass(tuple(g.vert(i, j) for j in range(my)), f"v{i}")
    return from_faces(mx * my, g.edges, faces, marked=mk, curves=curves)


def torus_diagonal(m: int) -> CurveClass:
    """Slope (1,1) staircase on ``torus_grid(m)``: alternating right/up steps."""
    g = _Grid(m, m, cyclic_y=True)
    darts = []
    for k in range(m):
        darts.append(g.h(k, k))
        darts.append(g.vert(k + 1, k))
    return CurveClass(tuple(darts), "diag")


@dataclass
class PuncturedTorus:
    surface: CombinatorialSurface
    family: CurveFamily
    twister: CurveClass | None


def twice_punctured_torus(m: int) -> PuncturedTorus:
    """``m`` x ``m`` torus grid with punctures at (0, m//4) and (0, 3m//4).

    ``g1``/``g2`` are the horizontal rings at levels 0 and m//2.  For
    ``m % 4 == 0`` and ``m >= 8`` the twister ``delta`` is the boundary of the
    rectangle [-1, 1] x [-(m//4+1), m//4+1]: it encloses both punctures,
    crosses ``g1`` twice and misses ``g2``.
    """
    if m < 4 or m % 2:
        raise ValueError("twice_punctured_torus needs even m >= 4")
    q = m // 4
    g = _Grid(m, m, cyclic_y=True)
    mk = [(0, q), (0, 3 * q if m % 4 == 0 else m - q)]
    s = torus_grid(m, m, marked=mk)
    g1 = CurveClass(g.ring(0).darts, "g1")
    g2 = CurveClass(g.ring(m // 2).darts, "g2")
    curves = {"g1": g1, "g2": g2}
    delta = None
    if m % 4 == 0 and m >= 8:
        r = q + 1
        d = []
        d += [g.h(i, -r) for i in range(-1, 1)]
        d += [g.vert(1, j) for j in range(-r, r)]
        d += [g.h(i, r, False) for i in range(0, -2, -1)]
        d += [g.vert(-1, j, False) for j in range(r - 1, -r - 1, -1)]
        delta = CurveClass(tuple(d), "delta")
        curves["delta"] = delta
    s = s.with_curves(curves)
    fam = CurveFamily((s.curve("g1"), s.curve("g2")), certificate={"disjoint": "by construction"})
    return PuncturedTorus(s, fam, s.curves.get("delta"))


# -- refinement ---------------------------------------------------------------

def refine(surface: CombinatorialSurface, factor: int) -> CombinatorialSurface:
    """Subdivide every quad ``factor`` x ``factor``; curves are transported.

    Boundary faces may have any length (their edges are subdivided).
    """
    if factor not in (2, 3):
        raise ValueError("refinement factor must be 2 or 3")
    s = surface
    f = factor
    for i, face in enumerate(s.faces):
        if i not in s.boundary_faces and len(face) != 4:
            raise SurfaceError("refine needs a quad-structured surface")
    V = s.vertex_count
    edges: list[tuple[int, int]] = []
    # edge e -> f sub-edges; point k along e (0 = u, f = v)
    points = {}
    sub = {}
    for e, (u, v) in enumerate(s.edges):
        pts = [u] + [V + (f - 1) * e + k for k in range(f - 1)] + [v]
        points[e] = pts
        sub[e] = []
        for k in range(f):
            sub[e].append(len(edges))
            edges.append((pts[k], pts[k + 1]))
    nv = V + (f - 1) * s.E

    def subdarts(h):
        e = h // 2
        if h % 2 == 0:
            return [2 * x for x in sub[e]]
        return [2 * x + 1 for x in reversed(sub[e])]

    new_faces = []
    boundary = []
    for fi, face in enumerate(s.faces):
        if fi in s.boundary_faces:
            boundary.append(len(new_faces))
            new_faces.append([x for h in face for x in subdarts(h)])
            continue
        sides = [subdarts(h) for h in face]
        interior = {}
        for a in range(1, f):
            for b in range(1, f):
                interior[a, b] = nv
                nv += 1

        local = {}

        def seg(p, q, sides=sides, local=local, interior=interior):
            (a, b), (c, d) = p, q
            if b == d == 0:
                return sides[0][a] if c == a + 1 else sides[0][c] ^ 1
            if a == c == f:
                return sides[1][b] if d == b + 1 else sides[1][d] ^ 1
            if b == d == f:
                return sides[2][f - 1 - c] if c == a - 1 else sides[2][f - 1 - a] ^ 1
            if a == c == 0:
                return sides[3][f - 1 - d] if d == b - 1 else sides[3][f - 1 - b] ^ 1
            key = (min(p, q), max(p, q))
            if key not in local:
                lo, hi = key
                local[key] = len(edges)
                edges.append((vertex_at(lo), vertex_at(hi)))
            e = local[key]
            return 2 * e if p == key[0] else 2 * e + 1

        def vertex_at(p, sides=sides, interior=interior):
            a, b = p
            if (a, b) in interior:
                return interior[a, b]
            if b == 0:
                h = sides[0][a] if a < f else sides[1][0]
            elif a == f:
                h = sides[1][b] if b < f else sides[2][0]
            elif b == f:
                h = sides[2][f - a] if a > 0 else sides[3][0]
            else:
                h = sides[3][f - b]
            return edges[h // 2][h % 2]

        for b in range(f):
            for a in range(f):
                new_faces.append([seg((a, b), (a + 1, b)), seg((a + 1, b), (a + 1, b + 1)),
                                  seg((a + 1, b + 1), (a, b + 1)), seg((a, b + 1), (a, b))])
    curves = {lab: CurveClass(tuple(x for h in c.darts for x in subdarts(h)), c.label)
              for lab, c in s.curves.items()}
    return from_faces(nv, edges, new_faces, marked=s.marked, boundary=boundary, curves=curves)


# -- glued cylinders --------------------------------------------------------------

@dataclass
class CylinderSpec:
    """Horizontal cylinders ``(m, h)`` and top/bottom arc pairings.

    ``gluing`` entries are ``((cyl, start, length), (cyl', start'))``: the top
    arc ``[start, start+length)`` of ``cyl`` is glued to the bottom arc of
    ``cyl'`` beginning at ``start'``, preserving direction.
    ``marked`` lists ``(cyl, x, y)`` grid points to puncture.  ``face_punctures``
    lists grid squares ``(cyl, x, y)`` (lower-left corner) that receive a marked
    centre vertex joined to the four corners; no grid edge is lost that way.
    """

    cylinders: list[tuple[int, int]]
    gluing: list[tuple[tuple[int, int, int], tuple[int, int]]]
    marked: list[tuple[int, int, int]] = field(default_factory=list)
    face_punctures: list[tuple[int, int, int]] = field(default_factory=list)

    @classmethod
    def from_json(cls, text: str) -> "CylinderSpec":
        d = json.loads(text)
        return cls([tuple(c) for c in d["cylinders"]],
                   [(tuple(a), tuple(b)) for a, b in d["gluing"]],
                   [tuple(x) for x in d.get("marked", [])],
                   [tuple(x) for x in d.get("face_punctures", [])])

    def to_json(self) -> str:
        return json.dumps({"cylinders": [list(c) for c in self.cylinders],
                           "gluing": [[list(a), list(b)] for a, b in self.gluing],
                           "marked": [list(x) for x in self.marked],
                           "face_punctures": [list(x) for x in self.face_punctures]})

    def scaled(self, f: int) -> "CylinderSpec":
        """Same flat surface on a grid ``f`` times finer."""
        if f < 1:
            raise ValueError("scale must be a positive integer")
        return CylinderSpec([(m * f, h * f) for m, h in self.cylinders],
                            [((c, a * f, n * f), (c2, b * f)) for (c, a, n), (c2, b) in self.gluing],
                            [(c, x * f, y * f) for c, x, y in self.marked],
                            [(c, x * f, y * f) for c, x, y in self.face_punctures])


@dataclass
class GluedSurface:
    surface: CombinatorialSurface
    family: CurveFamily
    expected: list[dict]
    spec: CylinderSpec | None = None


def glue_cylinders(spec: CylinderSpec) -> GluedSurface:
    cyl = spec.cylinders
    for m, h in cyl:
        if m < 3 or h < 1:
            raise SurfaceError(f"cylinder ({m}, {h}) too small")
    vkey = []
    voff = []
    for c, (m, h) in enumerate(cyl):
        voff.append(len(vkey))
        vkey += [(c, i, j) for j in range(h + 1) for i in range(m)]
    parent = list(range(len(vkey)))

    def vid(c, i, j):
        m, _ = cyl[c]
        return voff[c] + j * m + (i % m)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    top_used = [[False] * m for m, _ in cyl]
    bot_used = [[False] * m for m, _ in cyl]
    bottom_edge_of = {}
    for (c, start, length), (c2, start2) in spec.gluing:
        m, h = cyl[c]
        m2, _ = cyl[c2]
        for k in range(length):
            x, x2 = (start + k) % m, (start2 + k) % m2
            if top_used[c][x] or bot_used[c2][x2]:
                raise SurfaceError(f"arc {(c, start, length)} reuses a boundary edge")
            top_used[c][x] = bot_used[c2][x2] = True
            bottom_edge_of[c, x] = (c2, x2)
        for k in range(length + 1):
            a = find(vid(c, start + k, h))
            b = find(vid(c2, start2 + k, 0))
            parent[a] = b
    for c, (m, h) in enumerate(cyl):
        if not all(top_used[c]) or not all(bot_used[c]):
            raise SurfaceError(f"cylinder {c} has unglued boundary edges; pairing is not closed")
    roots = sorted({find(x) for x in range(len(vkey))})
    rid = {r: i for i, r in enumerate(roots)}

    def V(c, i, j):
        return rid[find(vid(c, i, j))]

    edges = []
    hid = {}
    vidx = {}
    for c, (m, h) in enumerate(cyl):
        for j in range(h):  # top ring edges are owned by the cylinder above
            for i in range(m):
                hid[c, i, j] = len(edges)
                edges.append((V(c, i, j), V(c, i + 1, j)))
        for j in range(h):
            for i in range(m):
                vidx[c, i, j] = len(edges)
                edges.append((V(c, i, j), V(c, i, j + 1)))

    def hd(c, i, j, fwd=True):
        m, h = cyl[c]
        i %= m
        if j == h:
            c, i = bottom_edge_of[c, i]
            j = 0
        return 2 * hid[c, i, j] + (0 if fwd else 1)

    def vd(c, i, j, fwd=True):
        m, _ = cyl[c]
        return 2 * vidx[c, i % m, j] + (0 if fwd else 1)

    nv = len(roots)
    marked = {V(c, i, j) for c, i, j in spec.marked}
    stars = {(c, i % cyl[c][0], j) for c, i, j in spec.face_punctures}
    for c, i, j in stars:
        if not 0 <= j < cyl[c][1]:
            raise SurfaceError(f"face puncture {(c, i, j)} outside cylinder {c}")
    faces = []
    for c, (m, h) in enumerate(cyl):
        for j in range(h):
            for i in range(m):
                quad = [hd(c, i, j), vd(c, i + 1, j), hd(c, i, j + 1, False), vd(c, i, j, False)]
                if (c, i, j) not in stars:
                    faces.append(quad)
                    continue
                centre = nv
                nv += 1
                marked.add(centre)
                corners = [V(c, i, j), V(c, i + 1, j), V(c, i + 1, j + 1), V(c, i, j + 1)]
                spoke = []
                for x in corners:
                    spoke.append(len(edges))
                    edges.append((centre, x))
                for k in range(4):
                    faces.append([quad[k], 2 * spoke[(k + 1) % 4] + 1, 2 * spoke[k]])
    curves = {}
    for c, (m, h) in enumerate(cyl):
        j = h // 2
        curves[f"c{c}"] = CurveClass(tuple(hd(c, i, j) for i in range(m)), f"c{c}")
    s = from_faces(nv, edges, faces, marked=marked, curves=curves)
    fam = CurveFamily(tuple(s.curve(f"c{c}") for c in range(len(cyl))),
                      certificate={"disjoint": "by construction"})
    expected = [{"label": f"c{c}", "a": float(m), "h": float(h), "M": h / m} for c, (m, h) in enumerate(cyl)]
    return GluedSurface(s, fam, expected, spec)


# two cylinders (4 x 3) and (4 x 2) glued to a genus-2 surface with a single
# cone point (angle 6 pi); one puncture sits inside the square next to it
GENUS2_SPEC = CylinderSpec(
    cylinders=[(4, 3), (4, 2)],
    gluing=[((0, 0, 2), (1, 0)), ((0, 2, 2), (0, 0)),
            ((1, 0, 2), (0, 2)), ((1, 2, 2), (1, 2))],
    face_punctures=[(0, 0, 0)],
)

# same surface punctured at the cone point itself; the puncture deletes every
# grid edge at that vertex, so the moduli carry a resolution-dependent error
GENUS2_CONE_SPEC = CylinderSpec(GENUS2_SPEC.cylinders, GENUS2_SPEC.gluing, marked=[(0, 0, 0)])


def genus2_fixture(scale: int = 1) -> GluedSurface:
    return glue_cylinders(GENUS2_SPEC.scaled(scale))


def genus2_cone_fixture(scale: int = 1) -> GluedSurface:
    return glue_cylinders(GENUS2_CONE_SPEC.scaled(scale))

"""Free homotopy: annular covers, shortest homotopic cycles, Dehn twists.

The annular cover of a class ``c`` has vertices ``(v, <c> g)``: a base vertex
together with a right coset of the cyclic subgroup.  Each cover edge carries
a winding number ``omega`` so that a closed walk in the cover winds
``sum(omega)`` times around the core.  Closed walks freely homotopic to the
class are exactly the projections of cover loops of winding one; shortest
ones are found with Dijkstra on a few stacked copies (sheets) of the
truncated cover.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .groups import Presentation, UnsupportedSurface
from .surface import CombinatorialSurface, CurveClass, CurveFamily

logger = logging.getLogger(__name__)

DEFAULT_DEPTH_CEILING = 64
# per-hop penalty (relative to the largest edge weight) selecting fewest-hop optima
HOP_PENALTY = 1e-13
MAX_SHEETS = 16
DEPTH_STEP = 2


class CoverError(RuntimeError):
    pass


class Verdict(str, Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    def __bool__(self):
        return self is Verdict.YES


_PRESENTATIONS: dict[int, tuple[CombinatorialSurface, Presentation]] = {}


def presentation(surface: CombinatorialSurface) -> Presentation:
    key = id(surface)
    hit = _PRESENTATIONS.get(key)
    if hit is None or hit[0] is not surface:
        hit = (surface, Presentation(surface))
        _PRESENTATIONS[key] = hit
    return hit[1]


def reduce_walk(darts: Sequence[int]) -> tuple[int, ...]:
    """Cancel immediate backtracks, cyclically."""
    out: list[int] = []
    for h in darts:
        if out and out[-1] == h ^ 1:
            out.pop()
        else:
            out.append(h)
    i, j = 0, len(out) - 1
    while i < j and out[i] == out[j] ^ 1:
        i += 1
        j -= 1
    return tuple(out[i:j + 1])


def canonical_rotation(darts: Sequence[int]) -> tuple[int, ...]:
    darts = tuple(darts)
    if not darts:
        return darts
    return min(darts[i:] + darts[:i] for i in range(len(darts)))


@dataclass
class AnnularCover:
    """Truncated annular cover of ``curve``: all cover vertices within
    ``depth`` hops of the lifted representative."""

    surface: CombinatorialSurface
    curve: CurveClass
    depth: int
    nodes: list = field(repr=False)
    node_depth: np.ndarray = field(repr=False)
    tail: np.ndarray = field(repr=False)
    head: np.ndarray = field(repr=False)
    dart: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    core: list = field(repr=False)
    complete: bool = False

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.tail)

    def deck_shift(self, node: int, sheet: int) -> tuple[int, int]:
        return node, sheet + 1

    def project(self, node: int) -> int:
        return self.nodes[node][0]

    def incidence(self):
        if getattr(self, "_inc", None) is None:
            inc = [[] for _ in range(self.n_nodes)]
            for i in range(self.n_edges):
                inc[self.tail[i]].append(i)
                if self.head[i] != self.tail[i]:
                    inc[self.head[i]].append(i)
            self._inc = inc
        return self._inc


def build_annular_cover(surface: CombinatorialSurface, curve: CurveClass, depth: int) -> AnnularCover:
    if depth < 1:
        raise ValueError("cover depth must be >= 1")
    P = presentation(surface)
    if not P.supported:
        raise UnsupportedSurface("annular covers need a marked vertex or boundary on genus >= 2")
    G = P.group
    surface.check_walk(curve.darts, curve.label)
    c = P.element(curve.darts)
    u, core = G.cyclic_core(c)
    if G.is_identity(core):
        raise CoverError(f"class {curve.label!r} is trivial or unliftable; see is_essential")
    cos = G.cosets(core)
    labels = P.dart_labels
    s = surface

    g = G.inv(u)
    index: dict = {}
    nodes: list = []
    depth_of: list[int] = []
    core_nodes = []
    v = s.tail(curve.darts[0])
    for h in curve.darts:
        key = (v, cos.canon(g)[1])
        if key not in index:
            index[key] = len(nodes)
            nodes.append(key)
            depth_of.append(0)
        core_nodes.append(index[key])
        g = G.mul(g, labels[h])
        v = s.head(h)

    frontier = deque(range(len(nodes)))
    complete = True
    while frontier:
        a = frontier.popleft()
        d = depth_of[a]
        v, h0 = nodes[a]
        for h in s.rotation[v]:
            lab = labels[h]
            if lab is None:
                continue
            key = (s.head(h), cos.canon(G.mul(h0, lab))[1])
            if key in index:
                continue
            if d >= depth:
                complete = False
                continue
            index[key] = len(nodes)
            nodes.append(key)
            depth_of.append(d + 1)
            frontier.append(index[key])

    tails, heads, darts, omegas = [], [], [], []
    for a, (v, h0) in enumerate(nodes):
        for h in s.rotation[v]:
            if h & 1 or labels[h] is None:
                continue
            k, hh = cos.canon(G.mul(h0, labels[h]))
            b = index.get((s.head(h), hh))
            if b is None:
                continue
            if a == b and k == 0:
                continue
            tails.append(a)
            heads.append(b)
            darts.append(h)
            omegas.append(k)
    # odd darts leaving v are covered as even darts leaving the other endpoint
    return AnnularCover(surface, curve, depth, nodes, np.array(depth_of), np.array(tails, dtype=np.int64),
                        np.array(heads, dtype=np.int64), np.array(darts, dtype=np.int64),
                        np.array(omegas, dtype=np.int64), core_nodes, complete)


@dataclass
class _Window:
    sheets: int  # sheets run from -sheets .. sheets+1
    rows: np.ndarray
    cols: np.ndarray
    edge: np.ndarray
    sources: np.ndarray


def _window(cover: AnnularCover, sheets: int) -> _Window:
    cache = cover.__dict__.setdefault("_windows", {})
    if sheets in cache:
        return cache[sheets]
    n = cover.n_nodes
    lo, hi = -sheets, sheets + 1
    rows, cols, edge = [], [], []
    for s in range(lo, hi + 1):
        t = s + cover.omega
        ok = (t >= lo) & (t <= hi)
        idx = np.nonzero(ok)[0]
        rows.append(cover.tail[idx] + (s - lo) * n)
        cols.append(cover.head[idx] + (t[idx] - lo) * n)
        edge.append(idx)
    pos = cover.omega > 0
    neg = cover.omega < 0
    src = np.unique(np.concatenate([cover.tail[pos], cover.head[neg]]))
    w = _Window(sheets, np.concatenate(rows), np.concatenate(cols), np.concatenate(edge), src)
    cache[sheets] = w
    return w


@dataclass
class CycleResult:
    length: float
    darts: tuple
    depth: int
    cover: AnnularCover = field(repr=False, default=None)
    # further cheap loops of the same class (all valid representatives)
    alternatives: list = field(default_factory=list, repr=False)


def _cover_loops(cover: AnnularCover, rho: np.ndarray, sheets: int, limit: int = 1):
    """Cheapest winding-one loops of the truncated cover, one per start node.

    Returns up to ``limit`` tuples ``(length, darts, touches_depth_limit,
    touches_sheet_limit)`` with distinct projections, cheapest first.
    """
    win = _window(cover, sheets)
    n = cover.n_nodes
    base_edge = cover.dart[win.edge] // 2
    scale = float(np.max(rho)) if len(rho) and np.max(rho) > 0 else 1.0
    w = rho[base_edge] + HOP_PENALTY * scale
    # keep the lightest of parallel entries
    key = win.rows * (n * (2 * sheets + 2)) + win.cols
    order = np.lexsort((w, key))
    key_s = key[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = key_s[1:] != key_s[:-1]
    keep = order[first]
    N = n * (2 * sheets + 2)
    M = csr_matrix((w[keep], (win.rows[keep], win.cols[keep])), shape=(N, N))
    srcs = win.sources + sheets * n
    if len(srcs) == 0:
        raise CoverError("cover has no winding edges")
    dist, pred = dijkstra(M, directed=False, indices=srcs, return_predecessors=True)
    targets = win.sources + (sheets + 1) * n
    d = dist[np.arange(len(srcs)), targets]
    ranked = np.argsort(d, kind="stable")
    if not np.isfinite(d[ranked[0]]):
        raise CoverError(f"no loop of winding one in truncated cover of {cover.curve.label!r}")
    inc = cover.incidence()
    out, seen = [], set()
    for i in ranked:
        if len(out) >= limit or not np.isfinite(d[i]):
            break
        path = [int(targets[i])]
        while path[-1] != srcs[i]:
            path.append(int(pred[i, path[-1]]))
        path.reverse()
        darts = canonical_rotation(_lift_darts(cover, inc, rho, path))
        if darts in seen:
            continue
        seen.add(darts)
        length = float(sum(rho[h // 2] for h in darts))
        nodes = [p % n for p in path]
        sheet_ids = [p // n for p in path]
        touches_depth = (not cover.complete) and bool(np.any(cover.node_depth[nodes] >= cover.depth))
        touches_sheet = any(s == 0 or s == 2 * sheets + 1 for s in sheet_ids)
        out.append((length, darts, touches_depth, touches_sheet))
    return out


def _lift_darts(cover, inc, rho, path):
    n = cover.n_nodes
    darts = []
    for x, y in zip(path, path[1:]):
        a, sa = x % n, x // n
        b, sb = y % n, y // n
        best = None
        for ei in inc[a]:
            t, hd, om = cover.tail[ei], cover.head[ei], cover.omega[ei]
            dart = int(cover.dart[ei])
            if t == a and hd == b and sa + om == sb:
                cand = (rho[dart // 2], dart)
            elif hd == a and t == b and sa - om == sb:
                cand = (rho[dart // 2], dart ^ 1)
            else:
                continue
            if best is None or cand < best:
                best = cand
        darts.append(best[1])
    return darts


_COVERS: dict = {}


def cached_cover(surface, curve, depth) -> AnnularCover:
    key = (id(surface), curve.darts, depth)
    hit = _COVERS.get(key)
    if hit is not None and hit.surface is surface:
        return hit
    if len(_COVERS) > 256:
        _COVERS.clear()
    cov = build_annular_cover(surface, curve, depth)
    _COVERS[key] = cov
    return cov


def default_depth(curve: CurveClass) -> int:
    # the cover grows exponentially with hop depth on free groups; start
    # shallow and let the touch test double it
    return 4


def shortest_homotopic_cycle(surface: CombinatorialSurface, rho, curve: CurveClass,
                             depth: int | None = None, ceiling: int = DEFAULT_DEPTH_CEILING,
                             sheets: int = 1, extra: int = 0) -> CycleResult:
    """Minimum rho-length closed walk freely homotopic to ``curve``.

    With ``extra > 0`` up to that many further loops, cheapest first, are
    returned in ``alternatives`` as ``(length, darts)`` pairs.
    """
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (surface.E,):
        raise ValueError(f"rho must have one entry per edge ({surface.E})")
    if np.any(~np.isfinite(rho)) or np.any(rho < 0):
        raise ValueError("rho must be finite and nonnegative")
    depth = depth or default_depth(curve)
    while True:
        if depth > ceiling:
            raise CoverError(f"cover depth ceiling {ceiling} exceeded for class {curve.label!r}")
        cover = cached_cover(surface, curve, depth)
        loops = _cover_loops(cover, rho, sheets, 1 + extra)
        length, darts, deep, wide = loops[0]
        if wide:
            if sheets >= MAX_SHEETS:
                raise CoverError(f"sheet window exceeded {MAX_SHEETS} for class {curve.label!r}")
            sheets *= 2
            continue
        if deep:
            # covers of free groups grow exponentially in depth: step, do not double
            depth += DEPTH_STEP
            continue
        return CycleResult(length, darts, depth, cover, [(x[0], x[1]) for x in loops[1:]])


# -- verdicts -----------------------------------------------------------------

def is_essential(surface, curve: CurveClass) -> Verdict:
    P = presentation(surface)
    if not P.supported:
        return Verdict.UNKNOWN
    return Verdict.NO if P.group.is_identity(P.element(curve.darts)) else Verdict.YES


def are_homotopic(surface, c1: CurveClass, c2: CurveClass, oriented: bool = False) -> Verdict:
    """Free homotopy of closed curves; unoriented by default."""
    P = presentation(surface)
    if not P.supported:
        return Verdict.UNKNOWN
    G = P.group
    a, b = P.element(c1.darts), P.element(c2.darts)
    if G.conjugate(a, b) or (not oriented and G.conjugate(a, G.inv(b))):
        return Verdict.YES
    return Verdict.NO


def is_peripheral(surface, curve: CurveClass) -> Verdict:
    P = presentation(surface)
    if not P.supported:
        return Verdict.UNKNOWN
    G = P.group
    a = P.element(curve.darts)
    if G.is_identity(a):
        return Verdict.NO
    for p in P.peripheral_elements:
        if G.conjugate(a, p) or G.conjugate(a, G.inv(p)):
            return Verdict.YES
    return Verdict.NO


def is_embedded(surface, curve: CurveClass) -> bool:
    verts = [surface.tail(h) for h in curve.darts]
    return len(set(verts)) == len(verts)


class AdmissibilityError(ValueError):
    def __init__(self, condition: str, witness=()):
        super().__init__(f"family not admissible: {condition}" + (f" (witness {witness})" if witness else ""))
        self.condition = condition
        self.witness = witness


def check_admissible(surface, family: CurveFamily, disjoint_by_construction: bool = False) -> dict:
    """Certify an admissible family or raise ``AdmissibilityError``.

    Disjointness is certified when the representatives share no vertex, or
    when the caller vouches for it (builders).
    """
    rep = surface.validate()
    k = len(family)
    if k < 1:
        raise AdmissibilityError("empty family")
    if k > rep.complexity:
        raise AdmissibilityError(f"cardinality {k} exceeds 3g-3+n = {rep.complexity}")
    for c in family:
        v = is_essential(surface, c)
        if v is not Verdict.YES:
            raise AdmissibilityError(f"essential: {v.value}", (c.label,))
        v = is_peripheral(surface, c)
        if v is not Verdict.NO:
            raise AdmissibilityError(f"non-peripheral: {'no' if v is Verdict.YES else 'unknown'}", (c.label,))
    for i in range(k):
        for j in range(i + 1, k):
            a, b = family[i], family[j]
            v = are_homotopic(surface, a, b)
            if v is not Verdict.NO:
                raise AdmissibilityError(f"homotopic pair ({v.value})", (a.label, b.label))
            if not disjoint_by_construction:
                va = {surface.tail(h) for h in a.darts}
                vb = {surface.tail(h) for h in b.darts}
                if va & vb:
                    raise AdmissibilityError("representatives intersect", (a.label, b.label))
    return {"k": k, "complexity": rep.complexity, "essential": True, "non_peripheral": True,
            "pairwise_non_homotopic": True,
            "disjoint": "by construction" if disjoint_by_construction else "vertex-disjoint representatives"}


# -- Dehn twists ----------------------------------------------------------------

def dehn_twist(surface, curve: CurveClass, twister: CurveClass, n: int) -> CurveClass:
    """Representative of the n-fold Dehn twist of ``curve`` about ``twister``.

    At every transverse passage of the walk through the twister cycle, the
    twister is traversed ``n`` times (direction fixed by the crossing
    direction).  Passages that enter and leave on the same side are left alone.
    """
    if not is_embedded(surface, twister):
        raise ValueError(f"twister {twister.label!r} is not an embedded cycle")
    label = curve.label if n == 0 else f"T{n}({curve.label})"
    if n == 0:
        return CurveClass(curve.darts, curve.label)
    s = surface
    tw = twister.darts
    L = len(tw)
    pos = {s.tail(h): i for i, h in enumerate(tw)}
    tw_edges = {h // 2 for h in tw}

    def side(p, h):
        i = pos[p]
        out_d = tw[i]
        in_d = tw[i - 1] ^ 1
        ring = s.rotation[p]
        k = len(ring)
        a, b = ring.index(out_d), ring.index(in_d)
        j = ring.index(h)
        # strictly between out and in (cyclically) -> left
        return "L" if 0 < (j - a) % k < (b - a) % k else "R"

    def loop_from(p, sign):
        i = pos[p]
        fwd = tw[i:] + tw[:i]
        if sign > 0:
            return list(fwd)
        return [h ^ 1 for h in reversed(fwd)]

    W = curve.darts
    m = len(W)
    on_tw = [s.tail(h) in pos for h in W]
    if all(h // 2 in tw_edges for h in W):
        return CurveClass(W, label)
    start = next(i for i in range(m) if not on_tw[i] or W[i - 1] // 2 not in tw_edges)
    W = W[start:] + W[:start]
    out: list[int] = []
    entry = None
    for i in range(m):
        h = W[i]
        p = s.tail(h)
        if p in pos:
            prev = W[i - 1]
            if prev // 2 not in tw_edges:
                entry = side(p, prev ^ 1)
            if h // 2 not in tw_edges:
                exit_side = side(p, h)
                if entry is not None and exit_side != entry:
                    eps = 1 if entry == "R" else -1
                    for _ in range(abs(n)):
                        out.extend(loop_from(p, eps * (1 if n > 0 else -1)))
                entry = None
        out.append(h)
    red = reduce_walk(out)
    if not red:
        raise ValueError("twisted walk reduced to a point")
    # reduce_walk may strip a cyclic backtrack; keep a closed walk starting anywhere
    surface.check_walk(red, label)
    return CurveClass(red, label)

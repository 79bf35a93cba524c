"""Fundamental groups of punctured / bordered combinatorial surfaces.

``Presentation`` computes pi_1 of the surface with marked vertices and
boundary faces removed, via a spanning tree and a dual cotree.  With at least
one hole the group is free; a closed torus gives Z^2; a closed sphere is
trivial.  Closed surfaces of genus >= 2 are not supported (``group`` is
``None``), and homotopy verdicts on them are reported as unknown.

Elements of free groups are reduced words: tuples of nonzero ints, ``i`` for
generator ``i-1`` and ``-i`` for its inverse.
"""

from __future__ import annotations

from collections import deque
from functools import cached_property
from math import gcd

from .surface import CombinatorialSurface

Word = tuple


def reduce_word(w) -> Word:
    out = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse_word(w) -> Word:
    return tuple(-x for x in reversed(w))


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """Return ``(u, c)`` with ``w = u c u^-1`` and ``c`` cyclically reduced."""
    w = reduce_word(w)
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return w[:i], w[i:j + 1]


def rotations(w: Word):
    for i in range(len(w)):
        yield w[i:] + w[:i]


class FreeGroup:
    kind = "free"

    def __init__(self, rank: int):
        self.rank = rank
        self.identity: Word = ()

    def from_letters(self, letters) -> Word:
        return reduce_word(letters)

    def mul(self, a: Word, b: Word) -> Word:
        # reduce only across the seam; both inputs are reduced
        i = 0
        n = min(len(a), len(b))
        while i < n and a[len(a) - 1 - i] == -b[i]:
            i += 1
        return a[:len(a) - i] + b[i:]

    def inv(self, a: Word) -> Word:
        return inverse_word(a)

    def is_identity(self, a: Word) -> bool:
        return not a

    def conjugate(self, a: Word, b: Word) -> bool:
        _, ca = cyclic_reduce(a)
        _, cb = cyclic_reduce(b)
        if len(ca) != len(cb):
            return False
        if not ca:
            return True
        doubled = ca + ca
        k = len(cb)
        return any(doubled[i:i + k] == cb for i in range(len(ca)))

    def cyclic_core(self, a: Word) -> tuple[Word, Word]:
        return cyclic_reduce(a)

    def cosets(self, c: Word) -> "FreeCosets":
        return FreeCosets(self, c)


class FreeCosets:
    """Right cosets <c> g of a cyclically reduced nontrivial word ``c``.

    The canonical representative is the shortest element of the coset, ties
    broken by tuple order.
    """

    def __init__(self, group: FreeGroup, c: Word):
        if not c or cyclic_reduce(c)[0]:
            raise ValueError("coset generator must be nontrivial and cyclically reduced")
        self.group = group
        self.c = c
        self.cinv = inverse_word(c)
        self._cache: dict = {}

    def canon(self, g: Word) -> tuple[int, Word]:
        hit = self._cache.get(g)
        if hit is not None:
            return hit
        mul = self.group.mul
        n = len(self.c)
        span = len(g) // n + 2
        best = (len(g), g, 0)
        # g = c^k h  <=>  h = c^-k g
        cur = g
        for k in range(1, span + 1):
            cur = mul(self.cinv, cur)
            cand = (len(cur), cur, k)
            if cand[:2] < best[:2]:
                best = cand
        cur = g
        for k in range(1, span + 1):
            cur = mul(self.c, cur)
            cand = (len(cur), cur, -k)
            if cand[:2] < best[:2]:
                best = cand
        out = (best[2], best[1])
        self._cache[g] = out
        return out


class AbelianGroup:
    """Z^rank; used for the closed torus."""

    kind = "abelian"

    def __init__(self, rank: int):
        self.rank = rank
        self.identity = (0,) * rank

    def from_letters(self, letters):
        v = [0] * self.rank
        for x in letters:
            v[abs(x) - 1] += 1 if x > 0 else -1
        return tuple(v)

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    def is_identity(self, a) -> bool:
        return not any(a)

    def conjugate(self, a, b) -> bool:
        return tuple(a) == tuple(b)

    def cyclic_core(self, a):
        return self.identity, a

    def cosets(self, c) -> "AbelianCosets":
        return AbelianCosets(self, c)


def _ext_gcd(a, b):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


class AbelianCosets:
    def __init__(self, group: AbelianGroup, c):
        if group.rank != 2 or not any(c):
            raise ValueError("abelian cosets implemented for nonzero elements of Z^2")
        self.group = group
        self.c = tuple(c)
        p, q = c
        d = gcd(abs(p), abs(q))
        self.d = d
        p0, q0 = p // d, q // d
        g, s, t = _ext_gcd(p0, q0)
        assert g == 1
        self.psi = (s, t)
        self.phi = (-q0, p0)

    def canon(self, g):
        s = self.psi[0] * g[0] + self.psi[1] * g[1]
        k = s // self.d
        h = (g[0] - k * self.c[0], g[1] - k * self.c[1])
        return k, h


class TrivialGroup(AbelianGroup):
    kind = "trivial"

    def __init__(self):
        super().__init__(0)


class Presentation:
    """Spanning-tree / cotree presentation of pi_1 of the holed surface."""

    def __init__(self, surface: CombinatorialSurface):
        self.surface = surface
        s = surface
        marked = s.marked
        self.alive_vertex = [v not in marked for v in range(s.vertex_count)]
        self.alive_edge = [u not in marked and v not in marked for u, v in s.edges]
        self.alive_face = []
        for i, f in enumerate(s.faces):
            ok = i not in s.boundary_faces and all(s.tail(h) not in marked for h in f)
            self.alive_face.append(ok)
        self._build()

    def _build(self) -> None:
        s = self.surface
        E = s.E
        roots = [v for v in range(s.vertex_count) if self.alive_vertex[v]]
        if not roots:
            raise ValueError("every vertex is marked")
        root = roots[0]
        in_tree = [False] * E
        seen = {root}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for h in s.rotation[v]:
                e = h // 2
                if not self.alive_edge[e]:
                    continue
                w = s.head(h)
                if w not in seen:
                    seen.add(w)
                    in_tree[e] = True
                    queue.append(w)
        if len(seen) != len(roots):
            raise ValueError("surface minus marked vertices is disconnected")
        self.root = root
        self.in_tree = in_tree

        fod = s.face_of_dart
        HOLE = -1

        def node(h):
            f = fod[h]
            return f if self.alive_face[f] else HOLE

        nontree = [e for e in range(E) if self.alive_edge[e] and not in_tree[e]]
        has_hole = any(node(2 * e) == HOLE or node(2 * e + 1) == HOLE
                       for e in range(E) if self.alive_edge[e])
        alive_faces = [f for f in range(len(s.faces)) if self.alive_face[f]]
        # dual BFS over non-tree edges
        adj: dict[int, list[int]] = {}
        for e in nontree:
            a, b = node(2 * e), node(2 * e + 1)
            adj.setdefault(a, []).append(e)
            if b != a:
                adj.setdefault(b, []).append(e)
        start = HOLE if has_hole else (alive_faces[0] if alive_faces else None)
        parent_edge: dict[int, int] = {}
        order = []
        if start is not None:
            visited = {start}
            queue = deque([start])
            while queue:
                x = queue.popleft()
                for e in adj.get(x, []):
                    a, b = node(2 * e), node(2 * e + 1)
                    y = b if a == x else a
                    if y not in visited:
                        visited.add(y)
                        parent_edge[y] = e
                        order.append(y)
                        queue.append(y)
            if len(visited) != len(alive_faces) + (1 if has_hole else 0):
                raise ValueError("dual graph of the holed surface is disconnected")
        cotree = set(parent_edge.values())
        gens = [e for e in nontree if e not in cotree]
        self.generators = gens
        expr: dict[int, Word] = {e: (i + 1,) for i, e in enumerate(gens)}

        def dart_word(h):
            e = h // 2
            if in_tree[e]:
                return ()
            w = expr[e]
            return w if h % 2 == 0 else inverse_word(w)

        for f in reversed(order):
            e = parent_edge[f]
            cyc = s.faces[f]
            t = next(i for i, h in enumerate(cyc) if h // 2 == e)
            rest = cyc[t + 1:] + cyc[:t]
            w: list = []
            for h in rest:
                w.extend(dart_word(h))
            w = inverse_word(reduce_word(w))
            expr[e] = w if cyc[t] % 2 == 0 else inverse_word(w)
        self.expr = expr
        self.relator: Word | None = None
        if not has_hole:
            self.holes = 0
            if start is not None:
                w = []
                for h in s.faces[start]:
                    w.extend(dart_word(h))
                self.relator = cyclic_reduce(reduce_word(w))[1]
        rank = len(gens)
        self.rank = rank
        if has_hole:
            self.group = FreeGroup(rank)
        elif rank == 0:
            self.group = TrivialGroup()
        elif rank == 2:
            self.group = AbelianGroup(2)
        else:
            self.group = None
        self._dart_word = dart_word

    @cached_property
    def dart_labels(self) -> list:
        """Group element per dart (``None`` for darts of removed edges)."""
        if self.group is None:
            return []
        out = []
        for h in range(2 * self.surface.E):
            if self.alive_edge[h // 2]:
                out.append(self.group.from_letters(self._dart_word(h)))
            else:
                out.append(None)
        return out

    @property
    def supported(self) -> bool:
        return self.group is not None

    def element(self, darts) -> object:
        """Group element of a closed walk (based at the tree root)."""
        if self.group is None:
            raise UnsupportedSurface("closed surfaces of genus >= 2 need at least one marked vertex")
        g = self.group.identity
        labels = self.dart_labels
        for h in darts:
            lab = labels[h]
            if lab is None:
                raise ValueError(f"walk uses edge {h // 2}, which touches a marked vertex")
            g = self.group.mul(g, lab)
        return g

    @cached_property
    def peripheral_elements(self) -> list:
        """Elements of loops around each marked vertex and boundary face."""
        s = self.surface
        out = []
        for p in sorted(s.marked):
            loop = self._link_loop(p)
            if loop is not None:
                out.append(self.element(loop))
        for f in sorted(s.boundary_faces):
            cyc = s.faces[f]
            if all(self.alive_edge[h // 2] for h in cyc):
                out.append(self.element(cyc))
        return out

    def _link_loop(self, p):
        s = self.surface
        ring = s.rotation[p]
        pred = {ring[i]: ring[i - 1] for i in range(len(ring))}
        loop = []
        h = ring[0]
        for _ in range(len(ring)):
            # face containing h: h, x1..xr, y with head(y) = p
            x = s.succ[h ^ 1]
            piece = []
            while s.head(x) != p:
                piece.append(x)
                x = s.succ[x ^ 1]
            loop.extend(piece)
            h = pred[h]
        if not loop or any(not self.alive_edge[x // 2] for x in loop):
            return None
        return loop


class UnsupportedSurface(NotImplementedError):
    pass

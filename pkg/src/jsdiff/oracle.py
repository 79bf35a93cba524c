"""Brute-force reference solver for small instances.

Every closed walk freely homotopic to a class lifts to a loop of winding one
in the annular cover; the walks that can ever be binding are the simple ones.
We enumerate those up to a hop bound by depth-first search and then solve the
dense quadratic program over the complete inventory as a least-distance
program (Lawson and Hanson) on top of ``scipy.optimize.nnls``.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .homotopy import build_annular_cover, canonical_rotation, shortest_homotopic_cycle
from .solver import ActiveCycle, ClassResult, ExtremalProblem, ExtremalSolution, SolverConfig
from .surface import CurveClass

logger = logging.getLogger(__name__)

SEARCH_BUDGET = 10_000_000


class OracleError(RuntimeError):
    pass


@dataclass
class CycleInventory:
    curve: CurveClass
    bound: int
    cycles: list          # canonical dart tuples, sorted
    depth: int
    search_nodes: int

    def __len__(self):
        return len(self.cycles)


def _simple_loops(cover, bound: int, budget: int):
    """Simple cover loops of winding +1 and at most ``bound`` edges."""
    n = cover.n_nodes
    adj: list[list] = [[] for _ in range(n)]
    for i in range(cover.n_edges):
        t, h, d, w = int(cover.tail[i]), int(cover.head[i]), int(cover.dart[i]), int(cover.omega[i])
        adj[t].append((h, d, w))
        adj[h].append((t, d ^ 1, -w))
    found = []
    visited = 0
    for s in range(n):
        # hop distance back to s inside the nodes >= s, for pruning
        dist = {s: 0}
        q = deque([s])
        while q:
            x = q.popleft()
            if dist[x] >= bound:
                continue
            for y, _, _ in adj[x]:
                if y >= s and y not in dist:
                    dist[y] = dist[x] + 1
                    q.append(y)
        on_path = {s}
        stack = [(s, 0, 0, iter(adj[s]))]
        path: list[int] = []
        while stack:
            x, length, wind, it = stack[-1]
            step = next(it, None)
            if step is None:
                stack.pop()
                if path:
                    path.pop()
                on_path.discard(x)
                continue
            y, d, w = step
            visited += 1
            if visited > budget:
                raise OracleError(f"search budget {budget} exceeded")
            if y < s or length + 1 + dist.get(y, bound + 1) > bound:
                continue
            if y == s:
                if wind + w == 1:
                    found.append(tuple(path + [d]))
                continue
            if y in on_path:
                continue
            on_path.add(y)
            path.append(d)
            stack.append((y, length + 1, wind + w, iter(adj[y])))
    return found, visited


def enumerate_cycles(surface, curve: CurveClass, length_bound: int,
                     budget: int = SEARCH_BUDGET) -> CycleInventory:
    """All closed walks homotopic to ``curve`` that lift to simple cover loops
    with at most ``length_bound`` edges (raised to the representative length).

    The cover depth is doubled until the inventory stops changing.
    """
    bound = max(int(length_bound), len(curve))
    depth = max(1, (bound + 1) // 2)
    prev = None
    total = 0
    while True:
        cover = build_annular_cover(surface, curve, depth)
        loops, visited = _simple_loops(cover, bound, budget - total)
        total += visited
        cycles = sorted({canonical_rotation(c) for c in loops})
        if cover.complete or cycles == prev:
            break
        prev = cycles
        depth *= 2
    rep = canonical_rotation(curve.darts)
    if rep not in cycles:
        cycles = sorted(cycles + [rep])
    return CycleInventory(curve, bound, cycles, depth, total)


def _ldp(G, h):
    """``min |x|^2 s.t. G x >= h`` via nnls; returns ``(x, duals)``."""
    m, n = G.shape
    E = np.vstack([G.T, h[None, :]])
    f = np.zeros(n + 1)
    f[n] = 1.0
    u, _ = nnls(E, f, maxiter=100 * (m + n + 1))
    r = E @ u - f
    if abs(r[n]) < 1e-14:
        raise OracleError("least-distance program reported infeasible")
    x = -r[:n] / r[n]
    lam = 2.0 * u / (-r[n])
    return x, lam


def _min_norm_dual(G, rho, tight):
    idx = np.nonzero(tight)[0]
    lam = np.zeros(G.shape[0])
    if idx.size == 0:
        return lam
    K = G[idx].T
    sol, *_ = np.linalg.lstsq(K, 2 * rho, rcond=None)
    if sol.min() < -1e-10 * max(1.0, np.abs(sol).max()):
        w = 1e6
        KK = np.vstack([w * K, np.eye(idx.size)])
        ff = np.concatenate([w * 2 * rho, np.zeros(idx.size)])
        sol, _ = nnls(KK, ff, maxiter=100 * idx.size)
    lam[idx] = np.maximum(sol, 0.0)
    return lam


def brute_solve(problem: ExtremalProblem, length_bound: int | None = None,
                max_doublings: int = 3, degeneracy_rel: float = SolverConfig.degeneracy_rel) -> ExtremalSolution:
    """Dense reference solution over complete cycle inventories."""
    s, fam = problem.surface, problem.family
    A = np.array(problem.targets)
    k = len(fam)
    live = [j for j in range(k) if A[j] > 0]
    if not live:
        per = [ClassResult(c.label, float(A[j]), 0.0, 0.0, 0.0, True) for j, c in enumerate(fam)]
        return ExtremalSolution(np.zeros(s.E), 0.0, per, [], 0.0, {"oracle": True})
    bound = length_bound or 2 * max(len(fam[j]) for j in live)
    for _ in range(max_doublings + 1):
        invs = {j: enumerate_cycles(s, fam[j], bound) for j in live}
        cls, cyc, rows = [], [], []
        for j in live:
            for c in invs[j].cycles:
                row = np.zeros(s.E)
                np.add.at(row, np.asarray(c) // 2, 1.0)
                cls.append(j)
                cyc.append(c)
                rows.append(row)
        G = np.array(rows)
        h = A[cls]
        rho, lam_ldp = _ldp(G, h)
        rho = np.maximum(rho, 0.0)
        # post hoc completeness: the shortest walks under rho must lie inside the bound
        ok = True
        a = np.zeros(k)
        for j in range(k):
            res = shortest_homotopic_cycle(s, rho, fam[j])
            a[j] = res.length
            if j in invs and (len(res.darts) >= bound or res.length < A[j] - 1e-9 * A.max()):
                ok = False
        if ok:
            break
        logger.info("oracle bound %d invalidated, doubling", bound)
        bound *= 2
    else:
        raise OracleError(f"inventory bound not validated after {max_doublings} doublings")
    N = float(rho @ rho)
    tight = (G @ rho - h) <= 1e-9 * max(1.0, A.max())
    lam = _min_norm_dual(G, rho, tight)
    b = np.zeros(k)
    for j, l in zip(cls, lam):
        b[j] += 0.5 * l
    M = np.where(A > 0, b / np.where(A > 0, A, 1.0), 0.0)
    Mmax = M.max()
    per = [ClassResult(fam[j].label, float(A[j]), float(a[j]), float(b[j]), float(M[j]),
                       not (Mmax > 0 and M[j] >= degeneracy_rel * Mmax)) for j in range(k)]
    dual_obj = float(lam @ h) - 0.25 * float(np.sum((G.T @ lam) ** 2))
    active = [ActiveCycle(j, c, float(l)) for j, c, l in zip(cls, cyc, lam) if l > 0]
    stats = {"oracle": True, "bound": bound, "inventory": {fam[j].label: len(invs[j]) for j in live},
             "ldp_dual_residual": float(np.max(np.abs(G.T @ lam_ldp - 2 * rho)))}
    return ExtremalSolution(rho, N, per, active, abs(N - dual_obj), stats)


@dataclass
class Comparison:
    rho: float
    norm: float
    a: float
    b: float
    M: float
    ok: bool
    failed: list

    def as_dict(self):
        return {"rho": self.rho, "norm": self.norm, "a": self.a, "b": self.b, "M": self.M,
                "ok": self.ok, "failed": list(self.failed)}


def compare(main: ExtremalSolution, ref: ExtremalSolution, rho_tol: float = 1e-6,
            norm_rel: float = 1e-8, class_tol: float = 1e-6) -> Comparison:
    """Infinity-norm differences between two solutions of the same problem."""
    if main.rho.shape != ref.rho.shape or len(main.per_class) != len(ref.per_class):
        raise ValueError("solutions belong to different problems")
    if any(x.label != y.label or x.A != y.A for x, y in zip(main.per_class, ref.per_class)):
        raise ValueError("solutions belong to different problems")
    d = {
        "rho": float(np.max(np.abs(main.rho - ref.rho), initial=0.0)),
        "norm": abs(main.norm - ref.norm),
        "a": float(np.max(np.abs(main.a - ref.a), initial=0.0)),
        "b": float(np.max(np.abs(main.b - ref.b), initial=0.0)),
        "M": float(np.max(np.abs(main.M - ref.M), initial=0.0)),
    }
    limits = {"rho": rho_tol, "norm": norm_rel * max(1.0, ref.norm), "a": class_tol,
              "b": class_tol, "M": class_tol}
    failed = [f for f in d if d[f] > limits[f]]
    return Comparison(**d, ok=not failed, failed=failed)

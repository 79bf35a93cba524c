"""Discrete extremal problem: minimum-energy metric with homotopic-length targets.

Given classes ``c_1..c_k`` and targets ``A_j >= 0`` we minimize ``sum_e rho_e^2``
over edge metrics such that every closed walk freely homotopic to ``c_j`` has
rho-length at least ``A_j``.  The optimum is unique (strictly convex objective).
Its value ``N`` plays the role of the norm, the dual multipliers of the cycle
constraints give heights ``b_j = sum(lambda_c)/2`` and moduli ``M_j = b_j/A_j``,
and ``N = sum_j A_j b_j`` holds exactly at optimum.

Constraints are generated lazily: the separation oracle is the shortest
homotopic cycle in each class.  The restricted quadratic program is solved by
dual coordinate ascent followed by an active-set polish that makes the KKT
system hold to rounding error.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import nnls

from .homotopy import (DEFAULT_DEPTH_CEILING, AdmissibilityError, Verdict, are_homotopic,
                       check_admissible, is_essential, shortest_homotopic_cycle)
from .surface import CombinatorialSurface, CurveClass, CurveFamily

logger = logging.getLogger(__name__)


class SolverError(RuntimeError):
    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class SolverConfig:
    gap_rel: float = 1e-9        # gap_tol = gap_rel * max(1, N)
    feas_rel: float = 1e-9       # feas_tol = feas_rel * max_j A_j
    degeneracy_rel: float = 1e-7
    max_cuts: int = 10_000
    depth_ceiling: int = DEFAULT_DEPTH_CEILING
    ascent_sweeps: int = 200
    cuts_per_round: int = 16
    cut_margin: float = 0.0        # also add loops up to (1 + margin) * A while separating
    working_slack: float = 0.0     # rows within this slack (relative to max A) stay in the QP
    certify: bool = True
    check_family: bool = True


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class ExtremalProblem:
    surface: CombinatorialSurface
    family: CurveFamily
    targets: tuple

    def __post_init__(self):
        A = tuple(float(a) for a in self.targets)
        if len(A) != len(self.family):
            raise ValueError(f"{len(A)} targets for {len(self.family)} classes")
        if any(not np.isfinite(a) or a < 0 for a in A):
            raise ValueError("targets must be finite and nonnegative")
        object.__setattr__(self, "targets", A)

    def with_targets(self, targets) -> "ExtremalProblem":
        return replace(self, targets=tuple(targets))


@dataclass
class ClassResult:
    label: str
    A: float
    a: float
    b: float
    M: float
    degenerate: bool


@dataclass
class ActiveCycle:
    cls: int
    darts: tuple
    dual: float


@dataclass
class ExtremalSolution:
    rho: np.ndarray
    norm: float
    per_class: list[ClassResult]
    active_cycles: list[ActiveCycle]
    duality_gap: float
    stats: dict = field(default_factory=dict)

    @property
    def A(self) -> np.ndarray:
        return np.array([c.A for c in self.per_class])

    @property
    def a(self) -> np.ndarray:
        return np.array([c.a for c in self.per_class])

    @property
    def b(self) -> np.ndarray:
        return np.array([c.b for c in self.per_class])

    @property
    def M(self) -> np.ndarray:
        return np.array([c.M for c in self.per_class])

    @property
    def degenerate(self) -> list[bool]:
        return [c.degenerate for c in self.per_class]

    def to_dict(self, surface: CombinatorialSurface | None = None) -> dict:
        def walk(darts):
            if surface is None:
                return list(darts)
            return CurveClass(tuple(darts)).signed()

        return {
            "norm": self.norm,
            "per_class": [{"label": c.label, "A": c.A, "a": c.a, "b": c.b, "M": c.M,
                           "degenerate": c.degenerate} for c in self.per_class],
            "rho": [float(x) for x in self.rho],
            "active_cycles": [{"class": self.per_class[c.cls].label, "cycle": walk(c.darts),
                               "dual": c.dual} for c in self.active_cycles],
            "duality_gap": self.duality_gap,
            "edge_sharing": self.stats.get("edge_sharing"),
        }

    def to_json(self, surface=None) -> str:
        return json.dumps(self.to_dict(surface), indent=2, default=_json_float)


def _json_float(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(type(x))


# -- restricted QP --------------------------------------------------------------

class CyclePool:
    """Cycle constraints ``chi_c . rho >= A_class(c)`` with deduplication."""

    def __init__(self, n_edges: int):
        self.n_edges = n_edges
        self.cls: list[int] = []
        self.darts: list[tuple] = []
        self.rows: list[np.ndarray] = []
        self._index: dict = {}

    def __len__(self):
        return len(self.cls)

    def index(self, cls: int, darts) -> int | None:
        return self._index.get((cls, tuple(darts)))

    def add(self, cls: int, darts) -> bool:
        key = (cls, tuple(darts))
        if key in self._index:
            return False
        self._index[key] = len(self.cls)
        row = np.zeros(self.n_edges)
        np.add.at(row, np.asarray(darts, dtype=np.int64) // 2, 1.0)
        self.cls.append(cls)
        self.darts.append(tuple(darts))
        self.rows.append(row)
        return True

    def matrix(self) -> np.ndarray:
        return np.array(self.rows) if self.rows else np.zeros((0, self.n_edges))


def _ascent(C, b, lam, sweeps, tol):
    """Cyclic dual coordinate ascent for ``max lam.b - |C^T lam|^2 / 4``."""
    supp = [np.nonzero(row)[0] for row in C]
    vals = [row[s] for row, s in zip(C, supp)]
    curv = np.array([0.5 * float(v @ v) for v in vals])
    r = 0.5 * (C.T @ lam)
    for _ in range(sweeps):
        biggest = 0.0
        for i in range(len(b)):
            s, v = supp[i], vals[i]
            step = (b[i] - v @ r[s]) / curv[i]
            new = max(0.0, lam[i] + step)
            d = new - lam[i]
            if d:
                lam[i] = new
                r[s] += 0.5 * d * v
                biggest = max(biggest, abs(d))
        if biggest < tol:
            break
    return lam


def _min_norm_dual(CS, rho):
    """Minimum-norm nonnegative ``lam`` with ``CS^T lam = 2 rho``."""
    target = 2.0 * rho
    lam, *_ = np.linalg.lstsq(CS.T, target, rcond=None)
    if lam.size == 0 or lam.min() >= -1e-12 * max(1.0, np.abs(lam).max()):
        return np.maximum(lam, 0.0)
    # a nonnegative solution exists but the affine min-norm point is not one:
    # weight the equation heavily and let nnls pick the smallest feasible lam
    w = 1e6 / max(1.0, np.abs(CS).max())
    K = np.vstack([w * CS.T, np.eye(CS.shape[0])])
    f = np.concatenate([w * target, np.zeros(CS.shape[0])])
    lam, _ = nnls(K, f, maxiter=50 * K.shape[1])
    return lam


def _polish(C, b, lam, tol):
    """Active-set refinement; returns ``(rho, lam)`` satisfying KKT, or None."""
    m = len(b)
    r = 0.5 * (C.T @ lam)
    slack = C @ r - b
    scale = max(1.0, float(np.max(b)))
    S = set(np.nonzero((lam > 0) | (slack <= 1e-6 * scale))[0].tolist())
    for _ in range(4 * m + 10):
        idx = np.array(sorted(S), dtype=np.int64)
        if idx.size == 0:
            rho = np.zeros(C.shape[1])
            lamS = np.zeros(0)
        else:
            CS = C[idx]
            rho, *_ = np.linalg.lstsq(CS, b[idx], rcond=None)
            if np.max(np.abs(CS @ rho - b[idx])) > tol:
                # inconsistent active set: drop the most recently suspicious row
                S.discard(int(idx[np.argmin(lam[idx])]))
                continue
            lamS, *_ = np.linalg.lstsq(CS.T, 2.0 * rho, rcond=None)
        viol = b - C @ rho
        worst = int(np.argmax(viol)) if m else -1
        neg = int(np.argmin(lamS)) if lamS.size else -1
        if lamS.size and lamS[neg] < -tol:
            # a nonnegative multiplier might still exist for this rho
            lam_try = _min_norm_dual(C[idx], rho)
            if np.max(np.abs(C[idx].T @ lam_try - 2 * rho)) > tol * 10:
                S.discard(int(idx[neg]))
                continue
            lamS = lam_try
        if m and viol[worst] > tol:
            S.add(worst)
            continue
        out = np.zeros(m)
        if idx.size:
            out[idx] = np.maximum(_min_norm_dual(C[idx], rho), 0.0)
        return rho, out
    return None


def _least_distance(C, b):
    """``min |rho|^2 s.t. C rho >= b`` through one nnls solve (Lawson-Hanson).

    Returns ``(rho, lam)`` or None when nnls does not deliver a usable point.
    """
    m, n = C.shape
    E = np.vstack([C.T, b[None, :]])
    f = np.zeros(n + 1)
    f[n] = 1.0
    try:
        u, _ = nnls(E, f, maxiter=20 * (m + n + 1))
    except RuntimeError:
        return None
    r = E @ u - f
    if not r[n] < -1e-14:
        return None
    rho, lam = -r[:n] / r[n], 2.0 * u / (-r[n])
    # the optimum is the min-norm solution of the binding rows; solving that
    # system directly removes most of the rounding left by the nnls residual
    S = np.nonzero(lam > 0)[0]
    if S.size:
        rho2, *_ = np.linalg.lstsq(C[S], b[S], rcond=None)
        scale = max(1.0, float(np.max(np.abs(rho))))
        if np.max(np.abs(rho2 - rho)) <= 1e-9 * scale and np.max(b - C @ rho2) <= 1e-12 * scale:
            rho = rho2
            lam2, *_ = np.linalg.lstsq(C[S].T, 2.0 * rho, rcond=None)
            if lam2.min() >= 0:
                lam = np.zeros(m)
                lam[S] = lam2
    return rho, lam


def solve_restricted(C, b, lam0=None, sweeps=200, tol=1e-12):
    """Solve ``min |rho|^2 s.t. C rho >= b`` exactly on a finite pool."""
    m = len(b)
    res = _least_distance(C, b)
    if res is not None:
        rho, lam = res
        if np.max(b - C @ rho, initial=0.0) <= tol and np.max(np.abs(C.T @ lam - 2 * rho)) <= 1e3 * tol:
            return rho, lam
        logger.debug("least-distance solve inaccurate, falling back to ascent")
    lam = np.zeros(m) if lam0 is None else np.array(lam0, dtype=float)
    for attempt in range(60):
        lam = _ascent(C, b, lam, sweeps, tol * 1e-3)
        res = _polish(C, b, lam, tol)
        if res is not None:
            return res
        sweeps *= 2
    raise SolverError("restricted quadratic program did not converge",
                      {"constraints": m})


# -- main solver ------------------------------------------------------------------

def _check_family(surface, family: CurveFamily):
    rep = surface.validate()
    if rep.boundaries:
        # bordered fixtures: cores are peripheral to the boundary by design
        for c in family:
            if is_essential(surface, c) is not Verdict.YES:
                raise AdmissibilityError("essential", (c.label,))
        for i in range(len(family)):
            for j in range(i + 1, len(family)):
                if are_homotopic(surface, family[i], family[j]) is not Verdict.NO:
                    raise AdmissibilityError("homotopic pair", (family[i].label, family[j].label))
        return {"bordered_fixture": True}
    if family.certificate is not None:
        return family.certificate
    return check_admissible(surface, family)


def _zero_solution(problem: ExtremalProblem) -> ExtremalSolution:
    s = problem.surface
    rho = np.zeros(s.E)
    per = [ClassResult(c.label, A, 0.0, 0.0, 0.0, True)
           for c, A in zip(problem.family, problem.targets)]
    return ExtremalSolution(rho, 0.0, per, [], 0.0, {"cuts": 0, "rounds": 0, "edge_sharing": 0})


def solve_F(problem: ExtremalProblem, config: SolverConfig = DEFAULT_CONFIG,
            initial_cycles: Sequence[tuple[int, tuple]] = ()) -> ExtremalSolution:
    """Solve the extremal problem for ``problem``.

    ``initial_cycles`` is an optional warm start: (class index, darts) pairs
    added to the constraint pool before the first round.
    """
    s, fam = problem.surface, problem.family
    if config.check_family:
        _check_family(s, fam)
    A_all = np.array(problem.targets)
    live = [j for j in range(len(fam)) if A_all[j] > 0]
    if not live:
        return _zero_solution(problem)
    Amax = float(A_all.max())
    feas_tol = config.feas_rel * Amax
    qp_tol = 1e-12 * max(1.0, Amax)

    pool = CyclePool(s.E)
    for j in live:
        pool.add(j, fam[j].darts)
    for j, darts in initial_cycles:
        if j in live:
            pool.add(j, tuple(darts))

    depth = {j: None for j in live}
    lam = np.zeros(0)
    rho = None
    rounds = 0
    certified = not config.certify
    while True:
        rounds += 1
        C = pool.matrix()
        b = A_all[pool.cls]
        lam = np.concatenate([lam, np.zeros(len(pool) - len(lam))])
        # the restricted problem only needs rows that bind or nearly bind;
        # dropped rows come back through separation if they are violated again
        work = np.ones(len(pool), dtype=bool) if rho is None else (
            (lam > 0) | (C @ rho - b <= config.working_slack * Amax) | force)
        idx = np.nonzero(work)[0]
        rho_w, lam_w = solve_restricted(C[idx], b[idx], lam[idx], config.ascent_sweeps, qp_tol)
        rho = np.maximum(rho_w, 0.0)
        lam = np.zeros(len(pool))
        lam[idx] = lam_w
        force = np.zeros(len(pool), dtype=bool)
        added = 0

        def offer(j, length, darts, margin=0.0):
            nonlocal added
            if length >= A_all[j] - feas_tol + margin * A_all[j]:
                return
            if pool.add(j, darts):
                added += 1
            else:
                i = pool.index(j, darts)
                if not work[i]:
                    added += 1
                    reactivate.append(i)

        reactivate: list[int] = []
        for j in live:
            res = shortest_homotopic_cycle(s, rho, fam[j], depth=depth[j], ceiling=config.depth_ceiling,
                                           extra=config.cuts_per_round - 1)
            depth[j] = res.depth
            if res.length >= A_all[j] - feas_tol:
                continue
            # once the class is violated, near-tight loops are likely to bind soon
            for length, darts in [(res.length, res.darts)] + res.alternatives:
                offer(j, length, darts, config.cut_margin)
        if len(pool) > config.max_cuts:
            raise SolverError("cut ceiling exceeded", {"cuts": len(pool), "rounds": rounds,
                                                        "norm": float(rho @ rho)})
        force = np.zeros(len(pool), dtype=bool)
        force[reactivate] = True
        if added:
            continue
        if not certified:
            # one more separation pass on covers one hop deeper
            certified = True
            for j in live:
                res = shortest_homotopic_cycle(s, rho, fam[j], depth=depth[j] + 1,
                                               ceiling=max(config.depth_ceiling, depth[j] + 1))
                offer(j, res.length, res.darts)
            force = np.zeros(len(pool), dtype=bool)
            force[reactivate] = True
            if added:
                certified = False
                continue
        break

    return _assemble(problem, config, pool, rho, lam, depth, rounds)


def _assemble(problem, config, pool, rho, lam, depth, rounds) -> ExtremalSolution:
    s, fam = problem.surface, problem.family
    A_all = np.array(problem.targets)
    N = float(rho @ rho)
    k = len(fam)
    bsum = np.zeros(k)
    for c, l in zip(pool.cls, lam):
        bsum[c] += l
    b = 0.5 * bsum
    M = np.where(A_all > 0, b / np.where(A_all > 0, A_all, 1.0), 0.0)
    Mmax = float(M.max()) if k else 0.0
    per = []
    for j in range(k):
        d = depth.get(j)
        a = shortest_homotopic_cycle(s, rho, fam[j], depth=d, ceiling=max(config.depth_ceiling, d or 0)).length
        degen = not (Mmax > 0 and M[j] >= config.degeneracy_rel * Mmax)
        per.append(ClassResult(fam[j].label, float(A_all[j]), float(a), float(b[j]), float(M[j]), degen))
    C = pool.matrix()
    dual_obj = float(lam @ A_all[pool.cls]) - 0.25 * float(np.sum((C.T @ lam) ** 2))
    gap = abs(N - dual_obj)
    gap_tol = config.gap_rel * max(1.0, N)
    if gap > gap_tol:
        raise SolverError(f"duality gap {gap:.3e} above tolerance {gap_tol:.3e}",
                          {"norm": N, "gap": gap, "cuts": len(pool)})
    active = [ActiveCycle(c, d, float(l)) for c, d, l in zip(pool.cls, pool.darts, lam) if l > 0]
    active.sort(key=lambda x: (x.cls, x.darts))
    stats = {"cuts": len(pool), "rounds": rounds, "depths": dict(depth),
             "edge_sharing": edge_sharing(active, rho)}
    return ExtremalSolution(rho, N, per, active, gap, stats)


def edge_sharing(active: Sequence[ActiveCycle], rho) -> int:
    """Number of edges carried by active cycles of two or more classes."""
    owners: dict[int, set] = {}
    for c in active:
        for h in c.darts:
            owners.setdefault(h // 2, set()).add(c.cls)
    return sum(1 for e, cl in owners.items() if len(cl) > 1)


# -- derived quantities -------------------------------------------------------------

def single_family(curve: CurveClass) -> CurveFamily:
    return CurveFamily((curve,), {"single_class": True})


def extremal_length(surface, curve: CurveClass, config: SolverConfig = DEFAULT_CONFIG) -> float:
    """Discrete extremal length ``1/N`` of the unit-target single-class problem."""
    sol = solve_F(ExtremalProblem(surface, single_family(curve), (1.0,)),
                  replace(config, check_family=False) if not config.check_family else config)
    if sol.norm <= 0:
        raise SolverError("zero norm for a unit target")
    return 1.0 / sol.norm


def a_star(surface, family: CurveFamily, partial, k: int | None = None,
           config: SolverConfig = DEFAULT_CONFIG, solution: ExtremalSolution | None = None) -> float:
    """Threshold target for class ``k`` (default: last) below which it is degenerate.

    ``partial`` holds the targets of the other classes in family order.
    """
    n = len(family)
    k = n - 1 if k is None else k
    partial = list(partial)
    if len(partial) != n - 1:
        raise ValueError(f"need {n - 1} partial targets")
    A = partial[:k] + [0.0] + partial[k:]
    if solution is None:
        solution = solve_F(ExtremalProblem(surface, family, tuple(A)), config)
    return solution.per_class[k].a


def scale_check(problem: ExtremalProblem, lam: float, config: SolverConfig = DEFAULT_CONFIG) -> dict:
    """Check that targets scaled by sqrt(lam) scale rho by sqrt(lam) and N by lam."""
    if lam <= 0:
        raise ValueError("scale must be positive")
    base = solve_F(problem, config)
    t = np.sqrt(lam)
    scaled = solve_F(problem.with_targets(t * np.array(problem.targets)), config)
    rho_dev = float(np.max(np.abs(scaled.rho - t * base.rho))) if base.rho.size else 0.0
    n_dev = abs(scaled.norm - lam * base.norm)
    return {"lambda": lam, "norm": base.norm, "scaled_norm": scaled.norm,
            "rho_dev": rho_dev, "norm_dev": n_dev,
            "rho_rel": rho_dev / max(1e-300, t * float(np.max(np.abs(base.rho)))) if base.norm else rho_dev,
            "norm_rel": n_dev / max(1e-300, lam * base.norm) if base.norm else n_dev}


def stability_probe(problem: ExtremalProblem, dA, config: SolverConfig = DEFAULT_CONFIG,
                    base: ExtremalSolution | None = None) -> dict:
    """Compare solutions at ``A`` and ``A + dA`` against the subgradient bound."""
    dA = np.asarray(dA, dtype=float)
    A1 = np.array(problem.targets) + dA
    if np.any(A1 < 0):
        raise ValueError("perturbed targets must stay nonnegative")
    s0 = base or solve_F(problem, config)
    s1 = solve_F(problem.with_targets(A1), config)
    dN = abs(s1.norm - s0.norm)
    bound = 2.0 * max(np.abs(s0.b).sum(), np.abs(s1.b).sum()) * float(np.max(np.abs(dA), initial=0.0))
    slack = 1e-9 * max(1.0, s0.norm, s1.norm)
    return {"rho_change": float(np.max(np.abs(s1.rho - s0.rho), initial=0.0)), "norm_change": dN,
            "bound": bound, "ok": dN <= bound + slack}


def check_invariants(problem: ExtremalProblem, sol: ExtremalSolution,
                     config: SolverConfig = DEFAULT_CONFIG) -> dict:
    """Measure the optimality bundle of a solution; returns worst deviations."""
    E = problem.surface.E
    A = np.array(problem.targets)
    r2 = np.zeros(E)
    slack = 0.0
    for c in sol.active_cycles:
        row = np.zeros(E)
        np.add.at(row, np.asarray(c.darts) // 2, 1.0)
        r2 += c.dual * row
        slack = max(slack, abs(row @ sol.rho - A[c.cls]))
    stationarity = float(np.max(np.abs(2 * sol.rho - r2), initial=0.0))
    identity = abs(sol.norm - float(A @ sol.b))
    dich = 0.0
    for c in sol.per_class:
        if not c.degenerate:
            dich = max(dich, abs(c.a - c.A))
        else:
            dich = max(dich, c.A - c.a)
    feas = max((c.A - c.a for c in sol.per_class), default=0.0)
    return {"stationarity": stationarity, "complementary_slackness": slack,
            "norm_identity": identity, "dichotomy": dich, "feasibility": feas,
            "gap": sol.duality_gap}

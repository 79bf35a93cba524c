"""The surface of circumferences for two-class families.

Directions ``e = (cos t, sin t)`` on the quarter circle map to targets
``A = (sqrt(e1), sqrt(e2))``; the normalized point ``u = e / N(A)`` has
coordinates ``A_j^2`` of the unit-norm solution.  Where one class is
degenerate the traced curve is a flat segment orthogonal to an axis; the angle
between the far ends of the two segments is ``theta``.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .report import fmt
from .homotopy import AdmissibilityError, CoverError, check_admissible, dehn_twist
from .solver import (DEFAULT_CONFIG, ExtremalProblem, ExtremalSolution, SolverConfig, SolverError,
                     solve_F)
from .surface import CombinatorialSurface, CurveClass, CurveFamily

logger = logging.getLogger(__name__)


@dataclass
class CircumferenceSample:
    angle: float
    direction: tuple[float, float]
    A: np.ndarray
    norm: float
    u: np.ndarray
    M: np.ndarray
    b: np.ndarray
    a: np.ndarray
    degenerate: tuple[bool, bool]

    @property
    def unit_identity(self) -> float:
        return float(self.u @ self.M)


@dataclass
class Segments:
    ext: tuple[float, float]       # extremal lengths of the two classes
    proxy: tuple[float, float]     # shortest other-class length under the unit-norm single-class optimum
    solutions: tuple = field(default=(), repr=False)

    @property
    def heights(self) -> tuple[float, float]:
        return self.proxy[0] ** 2, self.proxy[1] ** 2

    @property
    def L1(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return (self.ext[0], 0.0), (self.ext[0], self.heights[0])

    @property
    def L2(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return (0.0, self.ext[1]), (self.heights[1], self.ext[1])


@dataclass
class CircumferenceCurve:
    samples: list[CircumferenceSample]
    segments: Segments
    theta: float


def theta_from(ext1: float, ext2: float, h1: float, h2: float) -> float:
    """Angle between the outer ends of the two flat segments.

    ``h1`` is the squared proxy height of the vertical segment at ``u1 = ext1``;
    ``h2`` the squared proxy of the horizontal one at ``u2 = ext2``.
    """
    return math.atan2(ext2, h2) - math.atan2(h1, ext1)


def _check_pair(family: CurveFamily):
    if len(family) != 2:
        raise ValueError("tracing needs a family of exactly two classes")


def segments(surface, family: CurveFamily, config: SolverConfig = DEFAULT_CONFIG) -> Segments:
    _check_pair(family)
    s1 = solve_F(ExtremalProblem(surface, family, (1.0, 0.0)), config)
    s2 = solve_F(ExtremalProblem(surface, family, (0.0, 1.0)), config)
    ext = (1.0 / s1.norm, 1.0 / s2.norm)
    proxy = (s1.per_class[1].a / math.sqrt(s1.norm), s2.per_class[0].a / math.sqrt(s2.norm))
    return Segments(ext, proxy, (s1, s2))


def theta(surface, family: CurveFamily, config: SolverConfig = DEFAULT_CONFIG,
          seg: Segments | None = None) -> float:
    seg = seg or segments(surface, family, config)
    return theta_from(seg.ext[0], seg.ext[1], *seg.heights)


def _sample(sol: ExtremalSolution, angle: float) -> CircumferenceSample:
    e = (math.cos(angle), math.sin(angle))
    A = sol.A
    u = A ** 2 / sol.norm
    return CircumferenceSample(angle, e, A, sol.norm, u, sol.M, sol.b, sol.a, tuple(sol.degenerate))


def _solve_direction(args):
    surface, family, angle, config, seeds = args
    e1, e2 = math.cos(angle), math.sin(angle)
    # clamp rounding at the endpoints so a vanishing target is exactly zero
    A = (math.sqrt(max(e1, 0.0)) if angle < math.pi / 2 else 0.0, math.sqrt(max(e2, 0.0)) if angle > 0 else 0.0)
    sol = solve_F(ExtremalProblem(surface, family, A), config, initial_cycles=seeds)
    return _sample(sol, angle)


def sample_angles(n: int) -> list[float]:
    if n < 3:
        raise ValueError("need at least 3 samples")
    return [0.5 * math.pi * i / (n - 1) for i in range(n)]


def trace(surface, family: CurveFamily, sample_count: int, config: SolverConfig = DEFAULT_CONFIG,
          jobs: int = 1) -> CircumferenceCurve:
    """Solve along evenly spaced directions; samples come back in angle order."""
    _check_pair(family)
    angles = sample_angles(sample_count)
    seg = segments(surface, family, config)
    # every sample starts from the same deterministic pool, whatever ``jobs`` is
    seeds = sorted({(c.cls, c.darts) for sol in seg.solutions for c in sol.active_cycles})
    tasks = [(surface, family, t, config, seeds) for t in angles]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            samples = list(pool.map(_solve_direction, tasks))
    else:
        samples = [_solve_direction(t) for t in tasks]
    return CircumferenceCurve(samples, seg, theta(surface, family, config, seg))


# -- diagnostics ---------------------------------------------------------------

def convexity_report(curve: CircumferenceCurve, tol_rel: float = 1e-6, angle_tol: float = 0.05,
                     subgradient_tol: float = 1e-7,
                     degeneracy_rel: float = DEFAULT_CONFIG.degeneracy_rel) -> dict:
    S = curve.samples
    if len(S) < 5:
        raise ValueError("convexity report needs at least 5 samples")
    U = np.array([s.u for s in S])
    M = np.array([s.M for s in S])
    A = np.array([s.A for s in S])
    N = np.array([s.norm for s in S])
    B = np.array([s.b for s in S])
    umax = float(np.max(np.linalg.norm(U, axis=1)))
    # (u - u0) . M0 for every ordered pair (row = base point)
    half = np.einsum("ik,ijk->ij", M, U[None, :, :] - U[:, None, :])
    half_worst = float(half.max())
    # N(A) - N(A0) - 2 <b0, A - A0>
    sub = N[None, :] - N[:, None] - 2 * np.einsum("ik,ijk->ij", B, A[None, :, :] - A[:, None, :])
    sub_worst = float(-sub.min())
    angles = []
    for i in range(1, len(S) - 1):
        if any(S[i].degenerate):
            continue
        t = U[i + 1] - U[i - 1]
        n = np.array([-t[1], t[0]])
        if n @ U[i] < 0:
            n = -n
        m = M[i]
        c = float(n @ m / (np.linalg.norm(n) * np.linalg.norm(m)))
        angles.append((i, math.acos(max(-1.0, min(1.0, c)))))
    worst_angle = max((a for _, a in angles), default=0.0)
    # a degenerate class has a (numerically) vanishing modulus and vice versa
    flags_ok = all(s.degenerate[j] == (s.M[j] < degeneracy_rel * s.M.max())
                   for s in S for j in range(2))
    return {
        "samples": len(S),
        "half_space_worst": half_worst,
        "half_space_tol": tol_rel * umax,
        "half_space_ok": half_worst <= tol_rel * umax,
        "subgradient_worst": sub_worst,
        "subgradient_ok": sub_worst <= subgradient_tol,
        "normal_angles": angles,
        "normal_worst": worst_angle,
        "normal_ok": worst_angle <= angle_tol,
        "unit_identity_worst": float(max(abs(s.unit_identity - 1.0) for s in S)),
        "degenerate_flags_consistent": flags_ok,
    }


def minsky_report(curve: CircumferenceCurve, slack: float = 1e-8) -> dict:
    """Squared normalized length of each class never exceeds its extremal length."""
    ext = np.array(curve.segments.ext)
    worst = -np.inf
    violations = 0
    for s in curve.samples:
        sq = s.a ** 2 / s.norm
        d = sq - ext
        worst = max(worst, float(d.max()))
        violations += int(np.sum(d > slack))
    h = curve.segments.heights
    for d in (h[0] - ext[1], h[1] - ext[0]):
        worst = max(worst, d)
        violations += int(d > slack)
    return {"worst_excess": worst, "violations": violations}


# -- twist sweep ----------------------------------------------------------------

@dataclass
class SweepStep:
    n: int
    theta: float
    ext: tuple[float, float]
    heights: tuple[float, float]
    minsky_ok: bool
    curve_length: int
    depths: dict


def twist_sweep(surface, family: CurveFamily, twister: CurveClass, n_max: int,
                config: SolverConfig = DEFAULT_CONFIG, slack: float = 1e-8) -> tuple[list[SweepStep], list[str]]:
    """Theta along the family {twist^n(first class), second class}.

    Returns the steps and any warnings; a step that exhausts the cover depth
    ends the sweep early.
    """
    _check_pair(family)
    g1, g2 = family[0], family[1]
    steps: list[SweepStep] = []
    warnings: list[str] = []
    for n in range(n_max + 1):
        c = dehn_twist(surface, g1, twister, n)
        fam = CurveFamily((CurveClass(c.darts, f"{g1.label}@{n}"), g2))
        try:
            cert = check_admissible(surface, fam)
            fam = CurveFamily(fam.classes, cert)
            seg = segments(surface, fam, config)
        except (CoverError, SolverError) as exc:
            warnings.append(f"sweep truncated at n={n}: {exc}")
            break
        except AdmissibilityError as exc:
            warnings.append(f"sweep truncated at n={n}: {exc}")
            break
        th = theta(surface, fam, config, seg)
        h = seg.heights
        ok = h[0] <= seg.ext[1] + slack and h[1] <= seg.ext[0] + slack
        depths = {k: v for sol in seg.solutions for k, v in sol.stats.get("depths", {}).items()}
        steps.append(SweepStep(n, th, seg.ext, h, ok, len(c), depths))
    return steps, warnings


# -- refinement -------------------------------------------------------------------

def refinement_study(levels: Sequence[int], build: Callable[[int], tuple], sample_count: int = 0,
                     config: SolverConfig = DEFAULT_CONFIG, expected: Callable | None = None) -> list[dict]:
    """Tabulate extremal lengths, proxies and theta per refinement level.

    ``build(level)`` returns ``(surface, family)``.  With ``expected`` given,
    ``expected(level, surface, family)`` returns per-class dicts with keys
    ``a`` and ``M`` and the table also holds the relative errors of the
    solution at targets ``a``.
    """
    rows = []
    prev = None
    for lev in levels:
        s, fam = build(lev)
        row: dict = {"level": lev, "edges": s.E}
        if len(fam) == 2:
            seg = segments(s, fam, config)
            row.update(ext1=seg.ext[0], ext2=seg.ext[1], h1=seg.heights[0], h2=seg.heights[1],
                       theta=theta(s, fam, config, seg))
            if sample_count:
                cur = trace(s, fam, sample_count, config)
                row["u"] = [tuple(x.u) for x in cur.samples]
        if expected is not None:
            exp = expected(lev, s, fam)
            sol = solve_F(ExtremalProblem(s, fam, tuple(e["a"] for e in exp)), config)
            row["a"] = [c.a for c in sol.per_class]
            row["M"] = [c.M for c in sol.per_class]
            row["a_err"] = max(abs(c.a - e["a"]) / e["a"] for c, e in zip(sol.per_class, exp))
            row["M_err"] = max(abs(c.M - e["M"]) / e["M"] for c, e in zip(sol.per_class, exp))
        if prev is not None:
            for key in ("ext1", "ext2", "h1", "h2", "theta", "M_err"):
                if key in row and key in prev:
                    row[f"d_{key}"] = row[key] - prev[key]
        rows.append(row)
        prev = row
    return rows


# -- output -------------------------------------------------------------------------

def trace_csv(curve: CircumferenceCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "u1", "u2", "M1", "M2", "b1", "b2", "deg1", "deg2"])
    for s in curve.samples:
        w.writerow([fmt(s.angle), fmt(s.u[0]), fmt(s.u[1]), fmt(s.M[0]), fmt(s.M[1]),
                    fmt(s.b[0]), fmt(s.b[1]), fmt(s.degenerate[0]), fmt(s.degenerate[1])])
    return buf.getvalue()


def sweep_csv(steps: Sequence[SweepStep]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "theta", "ext1", "ext2", "h1", "h2", "minsky_ok", "length"])
    for st in steps:
        w.writerow([st.n, fmt(st.theta), fmt(st.ext[0]), fmt(st.ext[1]), fmt(st.heights[0]),
                    fmt(st.heights[1]), fmt(st.minsky_ok), st.curve_length])
    return buf.getvalue()


def trace_svg(curve: CircumferenceCurve, size: int = 400) -> str:
    """Polyline of the traced curve with the two flat segments highlighted."""
    pts = [tuple(s.u) for s in curve.samples]
    seg = curve.segments
    allp = pts + list(seg.L1) + list(seg.L2)
    xs = [p[0] for p in allp]
    ys = [p[1] for p in allp]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    w, h = (x1 - x0) or 1.0, (y1 - y0) or 1.0
    sw = fmt(0.005 * max(w, h))

    def P(p):
        # flip y so the u2 axis points up
        return f"{fmt(p[0])},{fmt(y0 + y1 - p[1])}"

    line = " ".join(P(p) for p in pts)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="{fmt(x0)} {fmt(y0)} {fmt(w)} {fmt(h)}" preserveAspectRatio="xMidYMid meet">',
           f'<polyline fill="none" stroke="black" stroke-width="{sw}" points="{line}"/>']
    for name, (p, q) in (("L1", seg.L1), ("L2", seg.L2)):
        out.append(f'<polyline id="{name}" fill="none" stroke="red" stroke-width="{sw}" '
                   f'points="{P(p)} {P(q)}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"

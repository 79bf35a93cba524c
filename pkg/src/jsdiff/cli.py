"""Command-line front end.

Exit codes: 0 success, 1 usage or input error, 2 solver or validation
failure, 3 tolerance failure in a check command.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, fields


from . import builders, circumference, oracle, report
from .homotopy import AdmissibilityError, CoverError, UnsupportedSurface
from .solver import ExtremalProblem, SolverConfig, SolverError, a_star, extremal_length, solve_F
from .surface import CurveFamily, SurfaceError, loads

logger = logging.getLogger("jsdiff")

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_TOLERANCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class ToleranceFailure(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    gap_tol: float = 1e-9          # relative to max(1, N)
    feas_tol: float = 1e-9         # relative to max_j A_j
    tol_convex: float = 1e-6       # relative to max |u|
    angle_tol: float = 0.05
    degeneracy: float = 1e-7       # relative to max_j M_j
    depth_ceiling: int = 64
    sample_count: int = 33
    oracle_rho_tol: float = 1e-6
    oracle_norm_tol: float = 1e-8
    seed: int = 0                  # reserved; every algorithm is deterministic

    def __post_init__(self):
        for f in ("gap_tol", "feas_tol", "tol_convex", "angle_tol", "degeneracy",
                  "oracle_rho_tol", "oracle_norm_tol"):
            if not getattr(self, f) > 0:
                raise UsageError(f"config: {f} must be positive")
        if self.sample_count < 3:
            raise UsageError("config: sample_count must be at least 3")
        if self.depth_ceiling < 1:
            raise UsageError("config: depth_ceiling must be positive")

    @classmethod
    def load(cls, path: str | None) -> "RunConfig":
        if path is None:
            return cls()
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise UsageError(f"config: unknown keys {sorted(extra)}")
        return cls(**data)

    def solver(self) -> SolverConfig:
        return SolverConfig(gap_rel=self.gap_tol, feas_rel=self.feas_tol,
                            degeneracy_rel=self.degeneracy, depth_ceiling=self.depth_ceiling)

    def digest(self) -> str:
        return report.sha256_text(json.dumps(asdict(self), sort_keys=True))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in _csv_list(text)]
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file overriding tolerances and limits")
    common.add_argument("--out", help="output path (default: standard output)")
    common.add_argument("--format", choices=["json", "csv", "svg"], help="output format")
    common.add_argument("--reproducible", action="store_true", help="omit the timestamp from the header")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for trace")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = _Parser(prog="jsdiff", description=__doc__.splitlines()[0] if __doc__ else None,
                parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        return sub.add_parser(name, help=help_, parents=[common])

    q = add("validate", "topology report of a surface document")
    q.add_argument("file")

    q = add("build", "write a fixture surface document")
    q.add_argument("kind", choices=["grid-annulus", "tpt", "glue", "genus2"])
    q.add_argument("-m", type=int)
    q.add_argument("-n", type=int)
    q.add_argument("--spec", "-spec", dest="spec", help="cylinder gluing table (JSON)")
    q.add_argument("--scale", type=int, default=1)
    q.add_argument("-o", dest="output")

    for name, help_ in (("solve", "solve the extremal problem"),
                        ("oracle-check", "compare the solver with the brute-force oracle")):
        q = add(name, help_)
        q.add_argument("file")
        q.add_argument("--family", required=True)
        q.add_argument("--targets", required=True)
        if name == "oracle-check":
            q.add_argument("--bound", type=int)

    q = add("extremal-length", "discrete extremal length of one class")
    q.add_argument("file")
    q.add_argument("--class", dest="cls", required=True)

    q = add("a-star", "degeneration threshold of one class")
    q.add_argument("file")
    q.add_argument("--family", required=True)
    q.add_argument("--targets", required=True, help="targets of the other classes, in family order")
    q.add_argument("--index", type=int, help="class index (default: last)")

    q = add("trace", "trace the surface of circumferences of a two-class family")
    q.add_argument("file")
    q.add_argument("--family", required=True)
    q.add_argument("--samples", type=int)

    q = add("theta", "flat segments and the angle between them")
    q.add_argument("file")
    q.add_argument("--family", required=True)

    q = add("twist-sweep", "theta along Dehn twists of the first class")
    q.add_argument("file")
    q.add_argument("--family", required=True)
    q.add_argument("--twister", required=True)
    q.add_argument("--n-max", type=int, default=4)

    q = add("refine-study", "extremal lengths and theta under mesh refinement")
    q.add_argument("file")
    q.add_argument("--family", required=True)
    q.add_argument("--levels", type=int, default=1, help="number of x2 refinements")
    return p


# -- helpers ----------------------------------------------------------------------

def _read(path: str) -> tuple[str, object]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc

    return text, loads(text)


def _family(surface, labels: str) -> CurveFamily:
    try:
        return surface.family(_csv_list(labels))
    except KeyError as exc:
        raise UsageError(f"unknown curve label {exc}") from exc


def _write(path: str | None, text: str) -> None:
    """Write atomically: nothing appears at ``path`` unless the write completes."""
    if path is None:
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".jsdiff-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, prov: dict, payload: dict, csv_text: str | None = None, svg_text: str | None = None):
    fmt_ = args.format or "json"
    if fmt_ == "json":
        return report.dumps({"provenance": prov, **payload})
    if fmt_ == "csv":
        if csv_text is None:
            raise UsageError(f"{args.command} has no CSV output")
        return report.comment_header(prov) + csv_text
    if svg_text is None:
        raise UsageError(f"{args.command} has no SVG output")
    return f"<!--\n{report.comment_header(prov, '')}-->\n" + svg_text


def _kv_csv(rows: list[dict]) -> str:
    keys = list(rows[0])
    lines = [",".join(keys)]
    for r in rows:
        lines.append(",".join(report.fmt(r[k]) if not isinstance(r[k], str) else r[k] for k in keys))
    return "\n".join(lines) + "\n"


# -- commands ---------------------------------------------------------------------

def cmd_validate(args, cfg, prov_of):
    text, s = _read(args.file)
    rep = s.validate()
    return _emit(args, prov_of(text), {"topology": {k: v for k, v in rep.__dict__.items()}},
                 _kv_csv([{k: v for k, v in rep.__dict__.items() if k != "warnings"}]))


def cmd_build(args, cfg, prov_of):
    if args.kind == "grid-annulus":
        if args.m is None or args.n is None:
            raise UsageError("grid-annulus needs -m and -n")
        s, _ = builders.grid_annulus(args.m, args.n)
    elif args.kind == "tpt":
        if args.m is None:
            raise UsageError("tpt needs -m")
        s = builders.twice_punctured_torus(args.m).surface
    elif args.kind == "glue":
        if not args.spec:
            raise UsageError("glue needs --spec")
        try:
            with open(args.spec, encoding="utf-8") as fh:
                spec = builders.CylinderSpec.from_json(fh.read())
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read spec {args.spec}: {exc}") from exc
        s = builders.glue_cylinders(spec.scaled(args.scale)).surface
    else:
        s = builders.genus2_fixture(args.scale).surface
    recipe = json.dumps({"kind": args.kind, "m": args.m, "n": args.n, "scale": args.scale,
                         "spec": spec.to_json() if args.kind == "glue" else None}, sort_keys=True)
    doc = {"provenance": prov_of(recipe), **s.to_dict()}
    return json.dumps(doc, indent=1) + "\n"


def cmd_solve(args, cfg, prov_of):
    text, s = _read(args.file)
    fam = _family(s, args.family)
    prob = ExtremalProblem(s, fam, tuple(_floats(args.targets)))
    sol = solve_F(prob, cfg.solver())
    payload = sol.to_dict(s)
    rows = [{"label": c.label, "A": c.A, "a": c.a, "b": c.b, "M": c.M, "degenerate": c.degenerate}
            for c in sol.per_class]
    return _emit(args, prov_of(text), payload, _kv_csv(rows))


def cmd_oracle_check(args, cfg, prov_of):
    text, s = _read(args.file)
    fam = _family(s, args.family)
    prob = ExtremalProblem(s, fam, tuple(_floats(args.targets)))
    main = solve_F(prob, cfg.solver())
    ref = oracle.brute_solve(prob, args.bound)
    cmp_ = oracle.compare(main, ref, rho_tol=cfg.oracle_rho_tol, norm_rel=cfg.oracle_norm_tol)
    out = _emit(args, prov_of(text), {"comparison": cmp_.as_dict(), "main_norm": main.norm,
                                      "oracle_norm": ref.norm}, _kv_csv([cmp_.as_dict() | {"failed": ";".join(cmp_.failed)}]))
    if not cmp_.ok:
        sys.stderr.write(f"oracle mismatch in {', '.join(cmp_.failed)}\n")
        raise ToleranceFailure(out)
    return out


def cmd_extremal_length(args, cfg, prov_of):
    text, s = _read(args.file)
    try:
        c = s.curve(args.cls)
    except KeyError as exc:
        raise UsageError(f"unknown curve label {args.cls!r}") from exc
    ext = extremal_length(s, c, cfg.solver())
    return _emit(args, prov_of(text), {"class": args.cls, "extremal_length": ext},
                 _kv_csv([{"class": args.cls, "extremal_length": ext}]))


def cmd_a_star(args, cfg, prov_of):
    text, s = _read(args.file)
    fam = _family(s, args.family)
    val = a_star(s, fam, _floats(args.targets), args.index, cfg.solver())
    k = len(fam) - 1 if args.index is None else args.index
    return _emit(args, prov_of(text), {"class": fam[k].label, "a_star": val},
                 _kv_csv([{"class": fam[k].label, "a_star": val}]))


def cmd_trace(args, cfg, prov_of):
    text, s = _read(args.file)
    fam = _family(s, args.family)
    n = args.samples or cfg.sample_count
    cur = circumference.trace(s, fam, n, cfg.solver(), jobs=args.jobs)
    conv = circumference.convexity_report(cur, cfg.tol_convex, cfg.angle_tol, degeneracy_rel=cfg.degeneracy)
    conv["normal_angles"] = [[i, a] for i, a in conv["normal_angles"]]
    payload = {"theta": cur.theta, "ext": list(cur.segments.ext), "heights": list(cur.segments.heights),
               "samples": [{"theta": x.angle, "u": list(x.u), "M": list(x.M), "b": list(x.b),
                            "degenerate": list(x.degenerate)} for x in cur.samples],
               "convexity": conv}
    return _emit(args, prov_of(text), payload, circumference.trace_csv(cur), circumference.trace_svg(cur))


def cmd_theta(args, cfg, prov_of):
    text, s = _read(args.file)
    fam = _family(s, args.family)
    seg = circumference.segments(s, fam, cfg.solver())
    th = circumference.theta(s, fam, cfg.solver(), seg)
    row = {"ext1": seg.ext[0], "ext2": seg.ext[1], "h1": seg.heights[0], "h2": seg.heights[1], "theta": th}
    return _emit(args, prov_of(text), row, _kv_csv([row]))


def cmd_twist_sweep(args, cfg, prov_of):
    text, s = _read(args.file)
    fam = _family(s, args.family)
    try:
        tw = s.curve(args.twister)
    except KeyError as exc:
        raise UsageError(f"unknown curve label {args.twister!r}") from exc
    steps, warns = circumference.twist_sweep(s, fam, tw, args.n_max, cfg.solver())
    for w in warns:
        logger.warning(w)
    payload = {"steps": [{"n": st.n, "theta": st.theta, "ext": list(st.ext), "heights": list(st.heights),
                          "minsky_ok": st.minsky_ok, "length": st.curve_length} for st in steps],
               "warnings": warns}
    return _emit(args, prov_of(text), payload, circumference.sweep_csv(steps))


def cmd_refine_study(args, cfg, prov_of):
    text, s = _read(args.file)
    labels = _csv_list(args.family)
    _family(s, args.family)
    surfaces = [s]
    for _ in range(args.levels):
        surfaces.append(builders.refine(surfaces[-1], 2))
    rows = circumference.refinement_study(range(args.levels + 1),
                                          lambda lev: (surfaces[lev], surfaces[lev].family(labels)),
                                          config=cfg.solver())
    keys = ["level", "edges", "ext1", "ext2", "h1", "h2", "theta"]
    table = [{k: r[k] for k in keys if k in r} for r in rows]
    return _emit(args, prov_of(text), {"levels": rows}, _kv_csv(table))


COMMANDS = {
    "validate": cmd_validate, "build": cmd_build, "solve": cmd_solve, "oracle-check": cmd_oracle_check,
    "extremal-length": cmd_extremal_length, "a-star": cmd_a_star, "trace": cmd_trace,
    "theta": cmd_theta, "twist-sweep": cmd_twist_sweep, "refine-study": cmd_refine_study,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = RunConfig.load(args.config)

        def prov_of(text):
            return report.provenance(report.sha256_text(text), cfg.digest(), args.reproducible,
                                     config=asdict(cfg))

        out_path = args.out or getattr(args, "output", None)
        text = COMMANDS[args.command](args, cfg, prov_of)
        _write(out_path, text)
        return EXIT_OK
    except UsageError as exc:
        sys.stderr.write(f"jsdiff: {exc}\n")
        return EXIT_USAGE
    except ToleranceFailure as exc:
        # check commands leave no result file behind on failure
        sys.stderr.write(exc.args[0])
        return EXIT_TOLERANCE
    except (SurfaceError, AdmissibilityError, SolverError, CoverError, UnsupportedSurface,
            oracle.OracleError, ValueError) as exc:
        sys.stderr.write(f"jsdiff: {type(exc).__name__}: {exc}\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

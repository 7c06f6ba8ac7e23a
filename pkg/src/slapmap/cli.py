"""Command-line front end: ``slapmap analyze|regular|triangle|kite|nonergodic``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import errors
from .ergodic import ErgodicReport, analyze
from .geometry import extract_slap_map, load_polygon, polygon_report, regular_polygon
from .kite import DEFAULT_GUESS, bifurcation_probe, newton_solve, solve_report
from .lorenz import renormalization_tower
from .nonergodic import DEFAULT_APEX, build_nonergodic
from .regular import beta, predict_acips, regular_report
from .triangles import classify, predict_triangle, triangle_from_angles, triangle_report, triangle_spec

EXIT_OK, EXIT_INPUT, EXIT_MISMATCH, EXIT_NOT_EXPANDING = 0, 1, 2, 3
BINS_PER_UNIT = 3000
PROBE_BINS = 4000
ACUTE_SUPPORT_FRACTION = 0.999

INPUT_ERRORS = (
    errors.InvalidArity,
    errors.OutOfFamily,
    errors.InvalidAngles,
    errors.Degenerate,
    errors.SelfIntersecting,
    errors.OutOfPiDomain,
    errors.OutOfRange,
    OSError,
    json.JSONDecodeError,
    KeyError,
    ValueError,
)
MISMATCH_ERRORS = (
    errors.NoConvergence,
    errors.SingularJacobian,
    errors.OrbitMismatch,
    errors.NoBifurcationFound,
    errors.ConstructionFailed,
    errors.TowerValidationFailed,
    errors.NotConstant,
)


class Output:
    """Collects the report and any density tables, then writes them out."""

    def __init__(self, args):
        self.fmt = args.format
        self.out = args.out
        if self.out:
            os.makedirs(self.out, exist_ok=True)

    def densities(self, report: ErgodicReport, prefix: str = "component") -> list[str] | None:
        if not self.out:
            return None
        names = []
        for k, comp in enumerate(report.components):
            name = f"{prefix}_{k}_density.csv"
            with open(os.path.join(self.out, name), "w", newline="") as fh:
                fh.write(comp.density_csv())
            names.append(name)
        return names

    def emit(self, payload: dict, extra_files: dict[str, dict] | None = None) -> None:
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
        if self.out:
            with open(os.path.join(self.out, "report.json"), "w") as fh:
                fh.write(text)
            for name, data in (extra_files or {}).items():
                with open(os.path.join(self.out, name), "w") as fh:
                    fh.write(json.dumps(data, sort_keys=True, indent=2) + "\n")
        if self.fmt == "csv":
            sys.stdout.write(_summary_csv(payload))
        else:
            sys.stdout.write(text)


def _summary_csv(payload: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["component", "period", "support_lo", "support_hi"])
    report = payload.get("report") or payload.get("measured", {}).get("report")
    for k, comp in enumerate((report or {}).get("components", [])):
        for lo, hi in comp["support"]:
            w.writerow([k, comp["period"], repr(lo), repr(hi)])
    return buf.getvalue()


def _bins(args, perimeter: float) -> int:
    return args.bins if args.bins else max(10, int(round(BINS_PER_UNIT * perimeter)))


def _analysis_kwargs(args) -> dict:
    kw = {}
    if args.tol is not None:
        kw["tol"] = args.tol
    if args.max_iter is not None:
        kw["max_iter"] = args.max_iter
    return kw


def cmd_analyze(args) -> int:
    out = Output(args)
    P = load_polygon(args.polygon)
    f = extract_slap_map(P)  # raises NotExpanding for parallel facing sides
    report = analyze(f, _bins(args, P.perimeter), **_analysis_kwargs(args))
    payload = {"polygon": polygon_report(P), "report": report.to_dict(out.densities(report))}
    payload["acip_bounds"] = acip_bounds(f, P.d, report.count)
    out.emit(payload)
    return EXIT_MISMATCH if report.unresolved else EXIT_OK


def acip_bounds(f, sides: int, measured: int) -> dict:
    """The branch-count bound and the sharper side-count bound; only the latter is checked."""
    return {
        "branches_minus_one": len(f.branches) - 1,
        "sides": sides,
        "within_side_bound": 1 <= measured <= sides,
    }


def cmd_regular(args) -> int:
    out = Output(args)
    d = args.d
    if d < 3:
        raise errors.InvalidArity(f"d must be >= 3, got {d}")
    if d % 2 == 0:
        out.emit({"d": d, "even": True, "notice": "even d: the reduced slap map is the involution x -> 1 - x, every point has period two"})
        return EXIT_OK
    P = regular_polygon(d)
    report = analyze(extract_slap_map(P), _bins(args, P.perimeter), **_analysis_kwargs(args))
    ergodic, mixing = predict_acips(d)
    match_count = report.count == ergodic
    match_period = all(p == mixing for p in report.periods)
    payload = regular_report(d)
    payload["tower"] = renormalization_tower(1.0 / beta(d)).to_dict()
    payload["measured"] = {
        "ergodic": report.count,
        "periods": report.periods,
        "report": report.to_dict(out.densities(report)),
    }
    payload["match"] = {"ergodic": match_count, "mixing": match_period}
    out.emit(payload)
    ok = match_count and match_period and not report.unresolved
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_triangle(args) -> int:
    out = Output(args)
    spec = triangle_spec(args.a1, args.a2)
    P = triangle_from_angles(args.a1, args.a2)
    report = analyze(extract_slap_map(P), _bins(args, P.perimeter), **_analysis_kwargs(args))
    pred = predict_triangle(spec)
    payload = triangle_report(args.a1, args.a2)
    payload["polygon"] = polygon_report(P)
    payload["report"] = report.to_dict(out.densities(report))
    match = {
        "ergodic": report.count == pred.ergodic_count,
        "mixing": all(pred.period_ok(p) for p in report.periods),
    }
    if classify(spec) == "acute":
        covered = sum(len(c.cells) for c in report.components) / report.bin_count
        payload["support_fraction"] = covered
        match["full_support"] = covered >= ACUTE_SUPPORT_FRACTION
    else:
        match["second_iterate_invariance"] = payload["second_iterate_invariance"]
    payload["match"] = match
    out.emit(payload)
    return EXIT_OK if all(match.values()) and not report.unresolved else EXIT_MISMATCH


def cmd_kite(args) -> int:
    out = Output(args)
    if args.action == "solve":
        guess = tuple(args.guess) if args.guess else DEFAULT_GUESS
        kw = {}
        if args.tol is not None:
            kw["tol"] = args.tol
        if args.max_iter is not None:
            kw["max_iter"] = args.max_iter
        out.emit(solve_report(guess, **kw))
        return EXIT_OK
    if args.alpha is None or args.beta is None:
        root = newton_solve()
        alpha, beta_ = root.alpha, root.beta
    else:
        alpha, beta_ = args.alpha, args.beta
    result = bifurcation_probe(alpha, beta_, args.epsilon, args.bins or PROBE_BINS)
    payload = result.to_dict()
    payload["report"] = result.report.to_dict(out.densities(result.report))
    out.emit(payload)
    return EXIT_MISMATCH if result.report.unresolved else EXIT_OK


def cmd_nonergodic(args) -> int:
    out = Output(args)
    if args.n < 2:
        raise errors.InvalidArity(f"n must be >= 2, got {args.n}")
    result = build_nonergodic(args.n, args.apex, args.bins or BINS_PER_UNIT)
    payload = result.to_dict()
    payload["report"] = result.report.to_dict(out.densities(result.report))
    out.emit(payload, {"polygon.json": result.polygon.to_dict()})
    return EXIT_OK if result.ok else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bins", type=int, default=None, help="Ulam grid size (default 3000 per unit perimeter)")
    common.add_argument("--tol", type=float, default=None, help="convergence tolerance (default: the operation's own)")
    common.add_argument("--max-iter", type=int, default=None, help="iteration cap (default: the operation's own)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="directory for report.json and density CSVs")

    p = argparse.ArgumentParser(prog="slapmap", description="Slap maps of convex polygons and their invariant densities.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("analyze", parents=[common], help="ergodic decomposition of a polygon JSON file")
    s.add_argument("polygon")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("regular", parents=[common], help="regular d-gon: predictions against Ulam measurements")
    s.add_argument("d", type=int)
    s.set_defaults(func=cmd_regular)

    s = sub.add_parser("triangle", parents=[common], help="triangle with two given angles (radians)")
    s.add_argument("a1", type=float)
    s.add_argument("a2", type=float)
    s.set_defaults(func=cmd_triangle)

    s = sub.add_parser("kite", parents=[common], help="doubling orbit on kites: solve or probe")
    s.add_argument("action", choices=("solve", "probe"))
    s.add_argument("--guess", type=float, nargs=2, metavar=("ALPHA", "BETA"))
    s.add_argument("--alpha", type=float)
    s.add_argument("--beta", type=float)
    s.add_argument("--epsilon", type=float, default=1e-3)
    s.set_defaults(func=cmd_kite)

    s = sub.add_parser("nonergodic", parents=[common], help="convex 3n-gon with n ergodic components")
    s.add_argument("n", type=int)
    s.add_argument("--apex", type=float, default=DEFAULT_APEX)
    s.set_defaults(func=cmd_nonergodic)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except errors.NotExpanding as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_EXPANDING
    except MISMATCH_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

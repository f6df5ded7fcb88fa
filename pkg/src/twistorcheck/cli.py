"""Batch front end: point reports, grid scans, and verification sweeps.

Exit codes follow one contract everywhere: 0 means every check passed,
1 means a mathematical check failed (the bug-detector outcome), 2 means the
invocation or its inputs were unusable.  Output files are byte-identical for
identical configuration and seed; floating point values are serialized with
17 significant digits so they round-trip exactly.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import catalog
from .connection import (
    curvature_forms,
    round_sphere_curvature_residual,
    structure_equation_residual,
)
from .errors import TwistorcheckError
from .geometry import adapt_frame, random_unitary_rotation, rotate_frame
from .twistorform import chern_identity_residual, theorem_report

GRID_LIMIT = 10**7

# Per-check residual gates for verify-geometry; each matches the tolerance at
# which the corresponding identity is certified in the test suite.
STRUCTURE_EQ_TOL = 1e-6
CURVATURE_ID_TOL = 1e-4
CHERN_ID_TOL = 1e-4
PHI_FORMULA_TOL = 1e-10
N_ROUTE_TOL = 1e-6
FRAME_INVARIANCE_TOL = 1e-8


@dataclass(frozen=True)
class ScanConfig:
    """Validated parameters of a grid scan."""

    manifold_id: str
    grid: int
    fd_step: float = 1e-5
    tol: float = 1e-6
    seed: int = 0
    output_path: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.grid < 1:
            raise ValueError("grid must be >= 1")
        if not 1e-8 < self.fd_step < 1e-2:
            raise ValueError("fd_step must lie in (1e-8, 1e-2)")
        if self.format not in ("json", "csv"):
            raise ValueError("format must be 'json' or 'csv'")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


def _fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _to_json(obj, indent: int = 0) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{pad}  {json.dumps(str(k))}: {_to_json(v, indent + 1)}' for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ", ".join(_to_json(v, indent) for v in obj)
        return "[" + items + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    return json.dumps(obj)


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _parse_point(text: str, dim: int) -> np.ndarray:
    values = [float(tok) for tok in text.split(",")]
    if len(values) != dim:
        raise ValueError(f"point needs {dim} comma-separated reals, got {len(values)}")
    return np.array(values)


def report_payload(entry: catalog.CatalogEntry, point: np.ndarray, fd_step: float, tol: float) -> dict:
    rep = theorem_report(entry.patch, point, step=fd_step, tol=tol)
    structure = structure_equation_residual(entry.patch, point, step=fd_step)
    return {
        "manifold": entry.id,
        "point": [float(x) for x in rep.point],
        "normN2": rep.normN2,
        "margin": rep.margin,
        "sumA2": rep.sumA2,
        "bound_quarterA": rep.bound_quarterA,
        "bound_paper": rep.bound_paper,
        "chain_ok": rep.chain_ok.to_dict(),
        "nondegenerate": rep.nondegenerate,
        "pfaffian_sign": rep.pfaffian_sign,
        "structure_residual": structure,
        "phi_formula_mismatch": rep.phi_formula_mismatch,
        "n_route_mismatch": rep.n_route_mismatch,
    }


def cmd_report(args) -> int:
    entry = catalog.resolve(args.manifold)
    point = _parse_point(args.point, entry.patch.dim) if args.point else None
    if point is None:
        point = catalog.grid_points(entry.patch, 1)[0]
    payload = report_payload(entry, point, args.fd_step, args.tol)
    _emit(_to_json(payload) + "\n", args.out)
    return 0 if all(payload["chain_ok"].values()) else 1


def scan_rows(entry: catalog.CatalogEntry, config: ScanConfig):
    total = config.grid ** entry.patch.dim
    if total > GRID_LIMIT:
        raise ValueError(f"grid^dim = {total} exceeds the {GRID_LIMIT} guard")
    points = catalog.grid_points(entry.patch, config.grid)
    rows = []
    for u in points:
        rep = theorem_report(entry.patch, u, step=config.fd_step, tol=config.tol)
        rows.append(
            {
                "point": [float(x) for x in u],
                "normN2": rep.normN2,
                "margin": rep.margin,
                "bound_paper": rep.bound_paper,
                "chain_ok": rep.chain_ok.all_ok,
                "nondegenerate": rep.nondegenerate,
            }
        )
    return rows


def _scan_summary(rows) -> dict:
    return {
        "points": len(rows),
        "min_margin": min(r["margin"] for r in rows),
        "max_normN2": max(r["normN2"] for r in rows),
        "chain_violations": sum(0 if r["chain_ok"] else 1 for r in rows),
    }


def _scan_csv(entry: catalog.CatalogEntry, rows, summary) -> str:
    dim = entry.patch.dim
    header = [f"u{i + 1}" for i in range(dim)] + [
        "normN2",
        "margin",
        "bound_paper",
        "chain_ok",
        "nondegenerate",
    ]
    lines = [",".join(header)]
    for r in rows:
        cells = [_fmt_float(x) for x in r["point"]]
        cells += [_fmt_float(r["normN2"]), _fmt_float(r["margin"]), _fmt_float(r["bound_paper"])]
        cells += [str(r["chain_ok"]).lower(), str(r["nondegenerate"]).lower()]
        lines.append(",".join(cells))
    lines.append(
        "# summary min_margin=%s max_normN2=%s chain_violations=%d points=%d"
        % (
            _fmt_float(summary["min_margin"]),
            _fmt_float(summary["max_normN2"]),
            summary["chain_violations"],
            summary["points"],
        )
    )
    return "\n".join(lines) + "\n"


def cmd_scan(args) -> int:
    entry = catalog.resolve(args.manifold)
    config = ScanConfig(
        manifold_id=args.manifold,
        grid=args.grid,
        fd_step=args.fd_step,
        tol=args.tol,
        seed=args.seed,
        output_path=args.out,
        format=args.format,
    )
    started = time.perf_counter()
    rows = scan_rows(entry, config)
    summary = _scan_summary(rows)
    elapsed = time.perf_counter() - started
    if config.format == "csv":
        text = _scan_csv(entry, rows, summary)
    else:
        flat_rows = []
        for r in rows:
            row = {f"u{i + 1}": x for i, x in enumerate(r["point"])}
            row.update({k: r[k] for k in ("normN2", "margin", "bound_paper", "chain_ok", "nondegenerate")})
            flat_rows.append(row)
        text = _to_json({"manifold": entry.id, "rows": flat_rows, "summary": summary}) + "\n"
    _emit(text, args.out)
    # Wall time goes to stderr, never into the file: identical config and seed
    # must produce byte-identical output.
    print(
        f"scan {entry.id}: {summary['points']} points, "
        f"min margin {summary['min_margin']:.6g}, max |N|^2 {summary['max_normN2']:.6g}, "
        f"{summary['chain_violations']} chain violations, {elapsed:.2f}s",
        file=sys.stderr,
    )
    return 1 if summary["chain_violations"] else 0


def cmd_verify_algebra(args) -> int:
    from .algebra import run_algebra_sweep

    if args.samples < 1:
        raise ValueError("samples must be >= 1")
    n_list = [int(tok) for tok in args.n_list.split(",")]
    report = run_algebra_sweep(n_list, args.samples, args.seed)
    _emit(_to_json(report) + "\n", args.out)
    return 0 if report["all_pass"] else 1


def geometry_checks(entry: catalog.CatalogEntry, points: int, seed: int, rotations: int, fd_step: float) -> dict:
    patch = entry.patch
    rng = np.random.default_rng(seed)
    samples = catalog.sample_points(patch, points, rng)
    is_round = "unit_round_sphere" in patch.attributes
    checks = {
        "structure_equation": {"max_residual": 0.0, "tolerance": STRUCTURE_EQ_TOL},
        "phi_formula_equivalence": {"max_residual": 0.0, "tolerance": PHI_FORMULA_TOL},
        "nijenhuis_route_equivalence": {"max_residual": 0.0, "tolerance": N_ROUTE_TOL},
        "frame_invariance": {"max_residual": 0.0, "tolerance": FRAME_INVARIANCE_TOL},
    }
    if is_round:
        checks["curvature_identity"] = {"max_residual": 0.0, "tolerance": CURVATURE_ID_TOL}
        checks["chern_identity"] = {"max_residual": 0.0, "tolerance": CHERN_ID_TOL}

    def bump(name: str, value: float):
        checks[name]["max_residual"] = max(checks[name]["max_residual"], float(value))

    for u in samples:
        base = theorem_report(patch, u, step=fd_step)
        bump("structure_equation", structure_equation_residual(patch, u, step=fd_step))
        bump("phi_formula_equivalence", base.phi_formula_mismatch)
        bump("nijenhuis_route_equivalence", base.n_route_mismatch)
        for _ in range(rotations):
            U = random_unitary_rotation(patch.n, rng)
            frame = rotate_frame(adapt_frame(patch, u), U)
            rep = theorem_report(patch, u, step=fd_step, frame=frame)
            dev = max(
                abs(rep.normN2 - base.normN2) / max(1.0, abs(base.normN2)),
                abs(rep.margin - base.margin) / max(1.0, abs(base.margin)),
                abs(rep.det_F - base.det_F) / max(1.0, abs(base.det_F)),
                0.0 if rep.pfaffian_sign == base.pfaffian_sign else 1.0,
            )
            bump("frame_invariance", dev)
        if is_round:
            bump("curvature_identity", round_sphere_curvature_residual(curvature_forms(patch, u)))
            bump("chern_identity", chern_identity_residual(patch, u))
    for slot in checks.values():
        slot["pass"] = slot["max_residual"] <= slot["tolerance"]
    return {
        "manifold": entry.id,
        "points": points,
        "rotations": rotations,
        "seed": seed,
        "checks": checks,
        "all_pass": all(slot["pass"] for slot in checks.values()),
    }


def cmd_verify_geometry(args) -> int:
    entry = catalog.resolve(args.manifold)
    if args.points < 1:
        raise ValueError("points must be >= 1")
    report = geometry_checks(entry, args.points, args.seed, args.rotations, args.fd_step)
    _emit(_to_json(report) + "\n", args.out)
    return 0 if report["all_pass"] else 1


def _apply_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill flag defaults from a JSON config file; explicit flags win."""
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config, encoding="utf-8") as fh:
            values = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config file: {exc}")
    if not isinstance(values, dict):
        parser.error("config file must hold a JSON object")
    for key, value in values.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and args._explicit is not None and attr not in args._explicit:
            setattr(args, attr, value)


class _TrackExplicit(argparse.Action):
    """Record which flags were given explicitly so config files cannot override them."""

    def __call__(self, parser, namespace, values, option_string=None):
        if getattr(namespace, "_explicit", None) is None:
            namespace._explicit = set()
        namespace._explicit.add(self.dest)
        setattr(namespace, self.dest, values)


def _add_common(sub: argparse.ArgumentParser, manifold: bool = True) -> None:
    if manifold:
        sub.add_argument("--manifold", required=True, action=_TrackExplicit,
                         help="catalog id: flat:<n>, conformal4, nk-s6, torus:eps=<r>,freq=<k>")
    sub.add_argument("--fd-step", type=float, default=1e-5, action=_TrackExplicit,
                     help="finite difference step (default 1e-5)")
    sub.add_argument("--tol", type=float, default=1e-6, action=_TrackExplicit,
                     help="tolerance for the inequality chain (default 1e-6)")
    sub.add_argument("--seed", type=int, default=0, action=_TrackExplicit,
                     help="seed for randomized sampling (default 0)")
    sub.add_argument("--out", default=None, action=_TrackExplicit,
                     help="output path (default: stdout)")
    sub.add_argument("--config", default=None, action=_TrackExplicit,
                     help="JSON file with flag values; explicit flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twistorcheck",
        description="Verify non-degeneracy bounds for the pulled-back twistor 2-form "
        "on almost Hermitian coordinate patches.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("report", help="full certificate at a single point (JSON)")
    _add_common(p)
    p.add_argument("--point", default=None, action=_TrackExplicit,
                   help="comma-separated coordinates (default: domain center)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("scan", help="grid scan with per-point rows and a summary")
    _add_common(p)
    p.add_argument("--grid", type=int, default=3, action=_TrackExplicit,
                   help="points per axis (default 3)")
    p.add_argument("--format", choices=("json", "csv"), default="csv", action=_TrackExplicit)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify-algebra", help="exact rational identity sweep")
    _add_common(p, manifold=False)
    p.add_argument("--n-list", default="2,3", action=_TrackExplicit,
                   help="comma-separated half-dimensions (default 2,3)")
    p.add_argument("--samples", type=int, default=10000, action=_TrackExplicit,
                   help="random samples per n (default 10000)")
    p.set_defaults(func=cmd_verify_algebra)

    p = sub.add_parser("verify-geometry", help="residual checks on a catalog manifold")
    _add_common(p)
    p.add_argument("--points", type=int, default=10, action=_TrackExplicit,
                   help="number of sampled interior points (default 10)")
    p.add_argument("--rotations", type=int, default=4, action=_TrackExplicit,
                   help="random frame rotations per point (default 4)")
    p.set_defaults(func=cmd_verify_geometry)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "_explicit", None) is None:
        args._explicit = set()
    _apply_config_file(args, parser)
    try:
        return args.func(args)
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TwistorcheckError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

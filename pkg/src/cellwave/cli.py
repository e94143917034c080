"""Command-line interface: deterministic CSV/JSON emission.

Subcommands: ``resting-state``, ``dispersion``, ``branch``, ``shape`` and
``verify``.  All floats are written with shortest round-trip formatting
(repr), CSV uses comma delimiters with LF line endings, JSON reports use
sorted keys.  Identical configs produce byte-identical outputs.

Exit codes: 0 success, 2 config error, 3 solver/verification failure,
4 partial results.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from .config import RunConfig, load_config
from .errors import (
    BranchRangeError,
    CellWaveError,
    ConfigError,
    ContinuationStalledError,
    SolverError,
)
from .model import chi_c_star, resting_state
from .stability import classify, mode_spectrum
from .waves import (
    bifurcation_report,
    collocation_nodes,
    continue_branch,
    mean_curvature,
    normal_x,
    state_diagnostics,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_PARTIAL = 4


def _fmt(value) -> str:
    """Shortest round-trip decimal representation (17 significant digits cap)."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def _write_json(path: Path, payload: dict) -> None:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    path.write_text(text, newline="\n")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", newline="\n")


def _outdir(config: RunConfig, override) -> Path:
    directory = Path(override) if override else Path(config.output["directory"])
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def cmd_resting_state(config: RunConfig, outdir: Path) -> int:
    """Emit the resting state, the threshold and the stability verdict."""
    params = config.params
    rest = resting_state(params, config.f_act)
    star = chi_c_star(params, config.f_act, config.f_und)
    report = classify(params, config.f_act, config.f_und,
                      m_max=config.analysis["mode_max"],
                      region=config.analysis["root_region"],
                      seeds=config.analysis["seed_grid"])
    payload = {
        "c0": rest.c0,
        "P0": rest.P0,
        "R0": rest.R0,
        "chi_c": params.chi_c,
        "chi_c_star": star,
        "classification": {
            "stable": report.stable,
            "margin": report.margin,
            "margin_mode": report.margin_mode,
        },
    }
    if not report.stable:
        payload["classification"]["unstable_mode"] = report.margin_mode
    path = outdir / "resting_state.json"
    _write_json(path, payload)
    verdict = "stable" if report.stable else "unstable"
    print(f"resting state: c0={_fmt(rest.c0)} P0={_fmt(rest.P0)} "
          f"chi_c_star={_fmt(star)} -> {verdict}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_dispersion(config: RunConfig, outdir: Path) -> int:
    """Emit located growth rates over the mode range and chi_c grid."""
    params = config.params
    rows = []
    for m in range(config.analysis["mode_min"], config.analysis["mode_max"] + 1):
        for chi in config.analysis["chi_c_grid"]:
            spec = mode_spectrum(m, params.with_chi_c(chi), config.f_act,
                                 config.f_und,
                                 region=config.analysis["root_region"],
                                 seeds=config.analysis["seed_grid"])
            for root, resid in zip(spec.roots, spec.residuals):
                rows.append([m, chi, root.real, root.imag,
                             root == spec.principal, resid])
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    path = outdir / "dispersion.csv"
    _write_csv(path, ["m", "chi_c", "re_lambda", "im_lambda",
                      "is_principal", "residual"], rows)
    print(f"wrote {path} ({len(rows)} rows)")
    return EXIT_OK


def _branch_rows(branch, config: RunConfig):
    width = min(config.output["rho_width"], config.analysis["N"] + 1)
    header = (["V", "chi_c", "p1"]
              + [f"rho_{k}" for k in range(width)]
              + ["residual", "area_error"])
    rows = []
    for state in branch.states:
        diag = state_diagnostics(state, config.params, config.f_act,
                                 config.f_und)
        rows.append([state.V, state.chi_c, state.p1]
                    + list(state.shape.rho_cos[:width])
                    + [diag["residual_sup"], diag["area_error"]])
    return header, rows


def cmd_branch(config: RunConfig, outdir: Path) -> int:
    """Trace the branch and emit its states plus the expansion report."""
    params = config.params
    csv_path = outdir / "branch.csv"
    json_path = outdir / "branch_report.json"
    try:
        branch = continue_branch(params, config.f_act, config.f_und,
                                 V_max=config.analysis["V_max"],
                                 ds=config.analysis["ds"],
                                 n=config.analysis["N"],
                                 tol=config.analysis["newton_tol"])
    except ContinuationStalledError as exc:
        header, rows = _branch_rows(exc.points, config)
        _write_csv(csv_path, header, rows)
        _write_json(json_path, {"error": str(exc),
                                "states_completed": len(exc.points.states)})
        print(f"branch stalled: wrote partial {csv_path}", file=sys.stderr)
        return EXIT_PARTIAL
    header, rows = _branch_rows(branch, config)
    _write_csv(csv_path, header, rows)
    report = bifurcation_report(params, config.f_act, config.f_und,
                                n=config.analysis["N"],
                                h=config.analysis["report_step"],
                                tol=config.analysis["newton_tol"])
    _write_json(json_path, {
        "chi_c_star_closed_form": report.chi_c_star_closed_form,
        "chi_c_star_numeric": report.chi_c_star_numeric,
        "d_chi_ds_at_0": report.d_chi_ds_at_0,
        "d2_chi_ds2_at_0": report.d2_chi_ds2_at_0,
        "d2_chi_error_estimate": report.d2_chi_error_estimate,
        "d2_chi_ds2_candidates": report.d2_chi_ds2_candidates,
        "verdict": report.verdict,
        "matched_within": report.matched_within,
        "symmetry": report.symmetry,
        "used_arclength": branch.used_arclength,
        "n_states": len(branch.states),
    })
    print(f"wrote {csv_path} ({len(rows)} rows) and {json_path}")
    return EXIT_OK


def cmd_shape(config: RunConfig, outdir: Path, velocity: float) -> int:
    """Emit the boundary contour of the branch state nearest a speed."""
    params = config.params
    branch = continue_branch(params, config.f_act, config.f_und,
                             V_max=config.analysis["V_max"],
                             ds=config.analysis["ds"],
                             n=config.analysis["N"],
                             tol=config.analysis["newton_tol"])
    state = branch.state_nearest(velocity)
    thetas = collocation_nodes(state.shape.N)
    radius = state.shape.radius(thetas)
    n1 = normal_x(state.shape, thetas)
    kappa = mean_curvature(state.shape, thetas)
    c_bnd = state.c1 * np.exp(-params.a * state.V * radius * np.cos(thetas))
    rows = [[t, r, n, k, c]
            for t, r, n, k, c in zip(thetas, radius, n1, kappa, c_bnd)]
    path = outdir / "shape.csv"
    _write_csv(path, ["theta", "radius", "n1", "kappa", "c_boundary"], rows)
    print(f"wrote {path} (state V={_fmt(state.V)}, chi_c={_fmt(state.chi_c)})")
    return EXIT_OK


def cmd_verify(config: RunConfig, outdir: Path) -> int:
    """Run the acceptance criteria and write a deterministic report."""
    results = acceptance.run_all(config)
    payload = {
        "criteria": [
            {"index": r.index, "name": r.name, "passed": r.passed,
             "details": r.details}
            for r in results
        ],
        "all_passed": all(r.passed for r in results),
    }
    path = outdir / "verify_report.json"
    _write_json(path, payload)
    for r in results:
        print(r.line())
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed; wrote {path}")
    return EXIT_OK if payload["all_passed"] else EXIT_SOLVER


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellwave",
        description="Resting-state stability and traveling-wave branches "
                    "of a Darcy free-boundary cell motility model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("resting-state", "resting state, threshold and stability verdict"),
        ("dispersion", "growth rates over the mode range and chi_c grid"),
        ("branch", "traveling-wave branch and expansion report"),
        ("shape", "boundary contour of the branch state nearest a speed"),
        ("verify", "run the acceptance suite"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("-c", "--config", required=True, help="JSON config file")
        p.add_argument("-o", "--outdir", default=None,
                       help="output directory (default: config output.directory)")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE",
                       help="override a config key, e.g. analysis.V_max=0.2")
        if name == "shape":
            p.add_argument("--velocity", type=float, required=True,
                           help="branch speed to emit")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        outdir = _outdir(config, args.outdir)
        if args.command == "resting-state":
            return cmd_resting_state(config, outdir)
        if args.command == "dispersion":
            return cmd_dispersion(config, outdir)
        if args.command == "branch":
            return cmd_branch(config, outdir)
        if args.command == "shape":
            return cmd_shape(config, outdir, args.velocity)
        if args.command == "verify":
            return cmd_verify(config, outdir)
    except BranchRangeError as exc:
        print(f"range error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, CellWaveError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())

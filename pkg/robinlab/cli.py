"""
cli.py – command-line front end
================================
    python -m robinlab solve   --domain interval:-1,1 --p 2 --beta 1
    python -m robinlab sweep   --config configs/interval_sweep.env
    python -m robinlab expand  --domain ball:2,1 --p 2 --beta-list 2,4,8,16
    python -m robinlab compare --p 2 --beta 6
    python -m robinlab check   --domain ball:2,1 --beta 1 --field exact
    python -m robinlab bracket --domain interval:-1,1 --beta 1

Every subcommand accepts ``--config FILE`` (KEY=value, see robinlab.config)
and the same keys as flags; flags win.  Artifacts go to OUTPUT_DIR and every
summary JSON embeds the resolved config.

Exit codes
----------
0   success / check passed
1   check failed, or a solver failed (error JSON on stdout and in error.json)
2   invalid configuration or input
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Callable, Sequence

import numpy as np

from robinlab import asymptotics, radial, variational, viscosity
from robinlab.config import COMMANDS, KNOWN_KEYS, RunConfig, load_run_config
from robinlab.errors import RobinLabError, SolverError, ValidationError
from robinlab.export import field_rows, jsonable, read_field_csv, write_csv, write_json
from robinlab.geometry import ScalarField, distance_field, grid_to_rows, make_grid
from robinlab.log import get_logger, parse_level, set_level

__all__ = ["main", "build_parser", "cmd_solve", "cmd_sweep", "cmd_expand", "cmd_compare", "cmd_check", "cmd_bracket"]

log = get_logger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INVALID = 2

_HELP = {
    "solve": "first eigenpair for one (domain, p, beta)",
    "sweep": "p-sweep towards the p → ∞ limit",
    "expand": "beta → ∞ curvature term on a ball or shell",
    "compare": "equal-volume shell against ball",
    "check": "viscosity residuals of the limit problem",
    "bracket": "eigenvalue bracket from the barrier comparison",
}


def _out(cfg: RunConfig, name: str) -> str:
    return os.path.join(cfg.output_dir, name)


def _say(tag: str, message: str) -> None:
    print(f"[{tag}] {message}")


def _solver_options(cfg: RunConfig) -> variational.SolverOptions:
    return variational.SolverOptions(max_iters=cfg.max_iters, tolerance=cfg.tolerance)


def _load_field(cfg: RunConfig, grid) -> ScalarField:
    source = cfg.field
    if source == "exact":
        return radial.limit_profile(cfg.beta, grid)
    if source == "constant":
        return ScalarField(grid, np.ones(grid.size))
    return read_field_csv(source, grid)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_solve(cfg: RunConfig) -> int:
    grid = make_grid(cfg.domain, cfg.resolution)
    solvers = ("radial", "variational") if cfg.solver == "both" else (cfg.solver,)
    lambdas = {}
    for solver in solvers:
        if solver == "radial":
            pair = radial.solve_eigen_radial(cfg.p, cfg.beta, cfg.domain, steps=cfg.steps)
            record = pair.to_dict()
            write_csv(_out(cfg, "profile.csv"), *pair.profile.to_rows())
        else:
            pair = variational.continuation(cfg.p, cfg.beta, grid, _solver_options(cfg))[-1]
            record = pair.to_dict()
            record["euler_lagrange_residual"] = variational.euler_lagrange_residual(pair)
        field = pair.eigenfunction_on(grid)
        record["config"] = cfg.to_dict()
        write_json(_out(cfg, f"eigenpair_{solver}.json"), record)
        write_csv(_out(cfg, f"field_{solver}.csv"), *field_rows(field))
        lambdas[solver] = pair.lam
        _say(solver, f"lambda = {pair.lam:.17g}")
        _say(solver, f"(-lambda)^(1/p) = {pair.root:.17g}")

    if cfg.export_grid:
        write_csv(_out(cfg, "grid.csv"), *grid_to_rows(grid))
    if len(lambdas) == 2:
        rel = abs(lambdas["radial"] - lambdas["variational"]) / abs(lambdas["radial"])
        _say("solve", f"relative solver gap = {rel:.3e}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    records = asymptotics.sweep_p(
        cfg.domain,
        cfg.beta,
        cfg.p_list,
        solver=cfg.solver,
        resolution=cfg.resolution,
        opts=_solver_options(cfg),
        steps=cfg.steps,
    )
    write_csv(
        _out(cfg, "sweep.csv"),
        ["p", "lambda", "root", "profile_gap", "energy_defect", "bounds_ok", "error"],
        [[*r.to_row(), r.energy_defect, r.bounds_ok, r.error] for r in records],
    )
    for r in records:
        status = "ok" if r.ok else f"failed: {r.error}"
        _say("sweep", f"p={r.p:g} root={r.root:.10f} gap={r.profile_gap:.3e} {status}")

    good = [r for r in records if r.ok]
    if not good:
        raise SolverError("every sweep entry failed; no limit estimate")
    last = good[-1]
    error = abs(last.root - cfg.beta) / cfg.beta
    tail = [r.root for r in good if r.p >= 4.0]
    summary = {
        "target_beta": cfg.beta,
        "limit_estimate": last.root,
        "relative_error": error,
        "tail_decreasing": all(b < a for a, b in zip(tail, tail[1:])),
        "final_profile_gap": last.profile_gap,
        "max_energy_defect": max(r.energy_defect for r in good),
        "bounds_ok": all(r.bounds_ok for r in good),
        "failed_entries": [r.p for r in records if not r.ok],
    }
    if len(good) >= 2:
        limit = asymptotics.extrapolate_limit(good)
        summary["cauchy_gaps"] = limit.gaps
        summary["gaps_decreasing"] = limit.monotone
        summary["boundary_maximum"] = asymptotics.boundary_maximum_ok(limit.estimate)
        write_csv(_out(cfg, "limit_field.csv"), *field_rows(limit.estimate))
    summary["pass"] = error <= cfg.limit_tolerance and summary["bounds_ok"]
    summary["config"] = cfg.to_dict()
    write_json(_out(cfg, "summary.json"), summary)
    _say("sweep", f"limit estimate {last.root:.10f} vs beta {cfg.beta:g}: {'PASS' if summary['pass'] else 'FAIL'}")
    return EXIT_OK if summary["pass"] else EXIT_FAIL


def cmd_expand(cfg: RunConfig) -> int:
    records = asymptotics.beta_expansion_check(cfg.domain, cfg.p, cfg.beta_list, steps=cfg.steps)
    write_csv(
        _out(cfg, "expansion.csv"),
        ["beta", "lambda", "leading", "curvature_coeff", "error"],
        [[*r.to_row(), r.error] for r in records],
    )
    good = [r for r in records if r.error is None]
    if not good:
        raise SolverError("every expansion entry failed")
    last = good[-1]
    summary = {
        "target": last.target,
        "last_curvature_coeff": last.curvature_coeff,
        "last_deviation": last.deviation,
        "failed_entries": [r.beta for r in records if r.error is not None],
        "pass": last.deviation <= cfg.expansion_tolerance,
        "config": cfg.to_dict(),
    }
    write_json(_out(cfg, "expansion_summary.json"), summary)
    for r in records:
        _say("expand", f"beta={r.beta:g} coeff={r.curvature_coeff:.8f} target={r.target:.8f}")
    return EXIT_OK if summary["pass"] else EXIT_FAIL


def cmd_compare(cfg: RunConfig) -> int:
    result = asymptotics.shell_vs_ball(
        cfg.dimension, cfg.volume, cfg.inner_radius, cfg.p, cfg.beta, steps=cfg.steps
    )
    payload = result.to_dict()
    payload["pass"] = result.verdict
    payload["config"] = cfg.to_dict()
    write_json(_out(cfg, "comparison.json"), payload)
    _say("compare", f"ball {result.lambda_ball:.12g}  shell {result.lambda_shell:.12g}")
    _say("compare", f"shell > ball: {result.verdict}")
    return EXIT_OK if result.verdict else EXIT_FAIL


def cmd_check(cfg: RunConfig) -> int:
    grid = make_grid(cfg.domain, cfg.resolution)
    field = _load_field(cfg, grid)
    report = viscosity.check_limit_pde(field, grid, cfg.beta)
    payload = report.to_dict()
    payload["log_transform"] = viscosity.log_transform_check(field, grid, cfg.beta).to_dict()
    payload["field"] = cfg.field
    payload["config"] = cfg.to_dict()
    write_json(_out(cfg, "viscosity_report.json"), payload)
    write_csv(_out(cfg, "viscosity_points.csv"), *report.to_rows())
    _say(
        "check",
        f"worst interior {report.worst_interior:.3e}, worst boundary {report.worst_boundary:.3e}, "
        f"tol {report.tolerance:.3e}: {'PASS' if report.passed else 'FAIL'}",
    )
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_bracket(cfg: RunConfig) -> int:
    grid = make_grid(cfg.domain, cfg.resolution)
    field = _load_field(cfg, grid).sup_normalized()
    result = viscosity.eigenvalue_bracket(field, grid, cfg.beta, cfg.eps_list)
    radius = float(distance_field(grid).values.max())
    checks = {}
    for factor in (0.5, 2.0):
        eps = 0.1 * cfg.beta
        barrier = viscosity.barrier_compare(field, grid, factor * cfg.beta, eps, 0.25 * eps / radius)
        checks[f"{factor:g}beta"] = barrier.to_dict()
    payload = result.to_dict()
    payload["off_target_barriers"] = checks
    payload["eps_list"] = list(cfg.eps_list)
    payload["config"] = cfg.to_dict()
    write_json(_out(cfg, "bracket.json"), payload)
    if result.admissible:
        _say("bracket", f"lambda in [{result.lambda_low:.6g}, {result.lambda_high:.6g}] (beta={cfg.beta:g})")
    else:
        _say("bracket", "no admissible lambda")
    return EXIT_OK if result.passed else EXIT_FAIL


_COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "expand": cmd_expand,
    "compare": cmd_compare,
    "check": cmd_check,
    "bracket": cmd_bracket,
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="KEY=value run config")
    common.add_argument("--verbose", action="store_true", help="log solver progress")
    for key in sorted(KNOWN_KEYS):
        if key == "export_grid":
            common.add_argument("--export-grid", dest=key, action="store_const", const="true", default=None)
        else:
            common.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None, metavar=key.upper())

    parser = argparse.ArgumentParser(
        prog="robinlab",
        description="First Robin p-Laplacian eigenvalue with negative parameter: solvers and limit checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=_HELP[name])
    return parser


def _fail(exc: RobinLabError, code: int, output_dir: str | None) -> int:
    payload = exc.to_dict()
    payload["exit_code"] = code
    if output_dir is not None:
        try:
            write_json(os.path.join(output_dir, "error.json"), payload)
        except OSError as io_exc:
            log.warning("could not write error.json: %s", io_exc)
    print(_dump(payload))
    print(f"[error] {exc}", file=sys.stderr)
    return code


def _dump(payload: dict) -> str:
    return json.dumps(jsonable(payload))


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    set_level("INFO" if args.verbose else parse_level(os.getenv("ROBINLAB_LOG_LEVEL")))
    overrides = {key: getattr(args, key) for key in KNOWN_KEYS}
    try:
        cfg = load_run_config(args.command, args.config, overrides)
    except ValidationError as exc:
        return _fail(exc, EXIT_INVALID, None)

    try:
        return _COMMANDS[args.command](cfg)
    except ValidationError as exc:
        return _fail(exc, EXIT_INVALID, cfg.output_dir)
    except RobinLabError as exc:
        return _fail(exc, EXIT_FAIL, cfg.output_dir)


if __name__ == "__main__":
    raise SystemExit(main())

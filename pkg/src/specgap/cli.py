"""Command-line front end.

Subcommands: validate | model-spectrum | sweep | verify | report.
Exit codes: 0 success, 1 verification/validation failure,
2 configuration error, 3 numerical failure.  All randomness flows from
the single config seed (overridable with --seed); the thread count
comes from --threads, else the SPECGAP_THREADS environment variable,
else the config.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .asymptotics import SweepSettings, VerdictStatus, run_sweep
from .config import (
    ConfigError,
    RunConfig,
    build_profiles,
    emit_config,
    model_mode_of,
    parse_config,
)
from .eigensolve import (
    InnerSolveStallError,
    Mode,
    NoConvergenceError,
    SolveSettings,
    smallest_eigenpairs,
)
from .expr import ExpressionError
from .grid import GridError, build_grid, suggest_grid
from .operators import OperatorError, build_model_operator, normalized_pair
from .profiles import ProfileError, validate_profile
from .reportio import (
    model_csv_text,
    render_report,
    write_report_files,
    write_text_atomic,
)

__all__ = ["main", "console_entry"]

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

THREADS_ENV = "SPECGAP_THREADS"


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specgap",
        description="Scaled spectral-gap laboratory for weighted Fourier-multiplier operators",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("validate", "check both configured profiles against their declared expansions"),
        ("model-spectrum", "compute the lowest model-operator eigenvalues"),
        ("sweep", "run the alpha ladder and write records, report and plot script"),
        ("verify", "run the sweep and judge the scaled-gap law; exit 0 only on PASS"),
        ("report", "re-render a previously written report.json"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the INI run configuration")
        p.add_argument("--out", default="specgap-out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=None, help="override the thread count")
    return parser


def _load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config(text)


def _resolve_threads(args, cfg: RunConfig) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
        if value < 1:
            raise ConfigError(f"{THREADS_ENV} must be >= 1")
        return value
    return cfg.threads


def _grid_for(cfg: RunConfig, pair):
    if cfg.grid_mode == "manual":
        return build_grid(cfg.dimension, cfg.grid_n, cfg.grid_half_length), (
            "grid supplied explicitly",
        )
    norm_pair, _ = normalized_pair(pair)
    suggestion = suggest_grid(norm_pair, k=cfg.eigen_count, alphas=cfg.alphas)
    return suggestion.build(), suggestion.reasoning


def cmd_validate(args) -> int:
    cfg = _load_config(args.config)
    pair = build_profiles(cfg)
    ok = True
    for role_name, spec in [("symbol", pair.a_profile), ("weight", pair.v_profile)]:
        report = validate_profile(spec)
        print(f"[{role_name}] {spec.label}: {'pass' if report.passed else 'FAIL'}")
        print(f"  expansion residual ladder: "
              + ", ".join(f"{r:.3e}" for r in report.expansion_residuals))
        print(f"  homogeneity residual: {report.homogeneity_residual_max:.3e}")
        print(f"  empirical domination constant: {report.domination_constant:.6g}")
        for failure in report.failures:
            print(f"  failure: {failure}")
        for note in report.notes:
            print(f"  note: {note}")
        ok = ok and report.passed
    return EXIT_OK if ok else EXIT_VERIFY_FAIL


def cmd_model_spectrum(args) -> int:
    cfg = _load_config(args.config)
    pair = build_profiles(cfg)
    grid, _ = _grid_for(cfg, pair)
    norm_pair, scale = normalized_pair(pair)
    mode = model_mode_of(cfg)
    settings = SolveSettings(
        k=cfg.eigen_count,
        tol=cfg.tol,
        max_iterations=cfg.max_iterations,
        rng_seed=cfg.seed if args.seed is None else args.seed,
        mode=mode,
    )
    pairs = smallest_eigenpairs(build_model_operator(norm_pair, grid), settings)
    mode_name = (settings.mode or (
        Mode.DENSE_FULL if grid.size <= 4096 else Mode.SHIFT_INVERT_BOTTOM
    )).value
    rows = [
        {
            "n": i + 1,
            "mu": scale * p.value,
            "residual": scale * p.residual,
            "N": grid.n_per_axis,
            "L": grid.half_length,
            "mode": mode_name,
        }
        for i, p in enumerate(pairs)
    ]
    print(f"model spectrum on {grid.describe()}:")
    for row in rows:
        print(f"  n={row['n']}: mu={row['mu']:.12g}  residual={row['residual']:.2e}")
    out = Path(args.out)
    write_text_atomic(out / "model_spectrum.csv", model_csv_text(rows))
    print(f"wrote {out / 'model_spectrum.csv'}")
    return EXIT_OK


def _run_configured_sweep(args, cfg: RunConfig):
    # fold CLI overrides into the config so the report echo reproduces
    # the run exactly
    cfg = replace(
        cfg,
        seed=cfg.seed if args.seed is None else args.seed,
        threads=_resolve_threads(args, cfg),
    )
    pair = build_profiles(cfg)
    grid, _ = _grid_for(cfg, pair)
    solver = SolveSettings(
        k=cfg.eigen_count,
        tol=cfg.tol,
        max_iterations=cfg.max_iterations,
        rng_seed=cfg.seed,
    )
    settings = SweepSettings(
        solver=solver,
        model_mode=model_mode_of(cfg),
        grid=grid,
        radii=cfg.radii,
        rel_final=cfg.rel_final,
        rel_extrap=cfg.rel_extrap,
        threads=cfg.threads,
        keep_vectors=cfg.emit_eigenfunctions,
    )
    report = run_sweep(pair, cfg.alphas, cfg.eigen_count, settings)
    report.config["source"] = emit_config(cfg)
    return report


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    report = _run_configured_sweep(args, cfg)
    paths = write_report_files(report, args.out)
    print(render_report(report.to_dict()))
    print(f"wrote {paths['records']}, {paths['report']}, {paths['plot']}")
    if any(not record.converged for record in report.records):
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _load_config(args.config)
    if len(cfg.alphas) < 3:
        raise ConfigError("verify needs an alpha ladder with at least 3 points")
    report = _run_configured_sweep(args, cfg)
    paths = write_report_files(report, args.out)
    print(render_report(report.to_dict()))
    print(f"wrote {paths['records']}, {paths['report']}, {paths['plot']}")
    if any(not record.converged for record in report.records):
        return EXIT_NUMERICAL
    if all(v.status is VerdictStatus.PASS for v in report.verdicts):
        return EXIT_OK
    return EXIT_VERIFY_FAIL


def cmd_report(args) -> int:
    path = Path(args.out) / "report.json"
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot render {path}: {exc}") from exc
    print(render_report(payload))
    return EXIT_OK


_COMMANDS = {
    "validate": cmd_validate,
    "model-spectrum": cmd_model_spectrum,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ProfileError, ExpressionError, GridError, OperatorError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoConvergenceError, InnerSolveStallError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def console_entry() -> None:
    raise SystemExit(main())

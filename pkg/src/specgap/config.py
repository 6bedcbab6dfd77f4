"""Declarative run configuration.

Runs are described by an INI document (key-value pairs in nested
sections, parsed with :mod:`configparser`).  ``parse_config`` and
``emit_config`` round-trip: emitting a parsed document yields the
normalized form of the input.  See the README for the full schema and
the documented range of every field.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field

from .eigensolve import Mode
from .profiles import (
    ProfilePair,
    ProfileRole,
    ProfileSpec,
    ProfileError,
    expression_profile,
    make_catalog_profile,
    make_pair,
)
from .expr import ExpressionError

__all__ = ["ConfigError", "ProfileConfig", "RunConfig", "parse_config", "emit_config",
           "build_profiles", "DEFAULT_CONFIG"]


class ConfigError(ValueError):
    """Malformed or out-of-range configuration."""


@dataclass(frozen=True)
class ProfileConfig:
    kind: str = "catalog"  # catalog | expression
    name: str = "gaussian_power"
    params: tuple[float, ...] = (2.0,)
    expr: str = ""
    principal: str = ""
    degree: float = 0.0
    margin: float | None = None


@dataclass(frozen=True)
class RunConfig:
    symbol: ProfileConfig = field(default_factory=ProfileConfig)
    weight: ProfileConfig = field(default_factory=ProfileConfig)
    dimension: int = 1
    alphas: tuple[float, ...] = (0.2, 0.1, 0.05, 0.025)
    eigen_count: int = 1
    grid_mode: str = "auto"  # auto | manual
    grid_n: int = 1024
    grid_half_length: float = 20.0
    tol: float = 1e-9
    max_iterations: int = 6000
    seed: int = 74082
    model_mode: str = "auto"  # auto | dense | shift_invert
    rel_final: float = 0.05
    rel_extrap: float = 0.02
    radii: tuple[float, ...] = (2.0, 4.0, 8.0)
    emit_eigenfunctions: bool = False
    threads: int = 1


_MODEL_MODES = {"auto": None, "dense": Mode.DENSE_FULL, "shift_invert": Mode.SHIFT_INVERT_BOTTOM}


def _floats(text: str, what: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"{what}: could not parse number list from {text!r}") from exc


def _profile_from_section(sec: configparser.SectionProxy, name: str) -> ProfileConfig:
    kind = sec.get("kind", "catalog").strip().lower()
    if kind == "catalog":
        return ProfileConfig(
            kind="catalog",
            name=sec.get("name", "gaussian_power").strip(),
            params=_floats(sec.get("params", "2"), f"[{name}] params"),
        )
    if kind == "expression":
        expr = sec.get("expr", "").strip()
        principal = sec.get("principal", "").strip()
        if not expr or not principal:
            raise ConfigError(f"[{name}] expression profiles need both expr and principal")
        if "degree" not in sec:
            raise ConfigError(f"[{name}] expression profiles need a degree")
        margin = sec.getfloat("margin") if "margin" in sec else None
        return ProfileConfig(
            kind="expression",
            name="",
            params=(),
            expr=expr,
            principal=principal,
            degree=sec.getfloat("degree"),
            margin=margin,
        )
    raise ConfigError(f"[{name}] unknown profile kind {kind!r}")


def parse_config(text: str) -> RunConfig:
    """Parse an INI run description; raises :class:`ConfigError` with a
    diagnostic on malformed input or out-of-range values."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"could not parse config: {exc}") from exc

    try:
        symbol = (
            _profile_from_section(parser["symbol"], "symbol")
            if parser.has_section("symbol")
            else ProfileConfig()
        )
        weight = (
            _profile_from_section(parser["weight"], "weight")
            if parser.has_section("weight")
            else ProfileConfig()
        )

        problem = parser["problem"] if parser.has_section("problem") else {}
        dimension = int(problem.get("dimension", 1))
        alphas = _floats(problem.get("alphas", "0.2, 0.1, 0.05, 0.025"), "[problem] alphas")
        eigen_count = int(problem.get("eigen_count", 1))

        grid = parser["grid"] if parser.has_section("grid") else {}
        grid_mode = str(grid.get("mode", "auto")).strip().lower()
        grid_n = int(grid.get("n", 1024))
        grid_half_length = float(grid.get("half_length", 20.0))

        solver = parser["solver"] if parser.has_section("solver") else {}
        tol = float(solver.get("tol", 1e-9))
        max_iterations = int(solver.get("max_iterations", 6000))
        seed = int(solver.get("seed", 74082))
        model_mode = str(solver.get("model_mode", "auto")).strip().lower()

        tols = parser["tolerances"] if parser.has_section("tolerances") else {}
        rel_final = float(tols.get("rel_final", 0.05))
        rel_extrap = float(tols.get("rel_extrap", 0.02))

        loc = parser["localization"] if parser.has_section("localization") else {}
        radii = _floats(loc.get("radii", "2, 4, 8"), "[localization] radii")

        out = parser["output"] if parser.has_section("output") else {}
        emit_eig = str(out.get("emit_eigenfunctions", "false")).strip().lower() in (
            "1",
            "true",
            "yes",
            "on",
        )

        run = parser["run"] if parser.has_section("run") else {}
        threads = int(run.get("threads", 1))
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config value: {exc}") from exc

    cfg = RunConfig(
        symbol=symbol,
        weight=weight,
        dimension=dimension,
        alphas=alphas,
        eigen_count=eigen_count,
        grid_mode=grid_mode,
        grid_n=grid_n,
        grid_half_length=grid_half_length,
        tol=tol,
        max_iterations=max_iterations,
        seed=seed,
        model_mode=model_mode,
        rel_final=rel_final,
        rel_extrap=rel_extrap,
        radii=radii,
        emit_eigenfunctions=emit_eig,
        threads=threads,
    )
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if not 1 <= cfg.dimension <= 3:
        raise ConfigError(f"dimension must be 1..3, got {cfg.dimension}")
    if cfg.eigen_count < 1:
        raise ConfigError(f"eigen_count must be >= 1, got {cfg.eigen_count}")
    if not cfg.alphas:
        raise ConfigError("alphas must be nonempty")
    if any(a <= 0 for a in cfg.alphas):
        raise ConfigError("alphas must be positive")
    if not all(b < a for a, b in zip(cfg.alphas, cfg.alphas[1:])):
        raise ConfigError("alphas must be strictly decreasing")
    if cfg.grid_mode not in ("auto", "manual"):
        raise ConfigError(f"grid mode must be auto or manual, got {cfg.grid_mode!r}")
    if cfg.grid_mode == "manual":
        if cfg.grid_n < 8 or cfg.grid_n % 2:
            raise ConfigError(f"grid n must be even and >= 8, got {cfg.grid_n}")
        if cfg.grid_half_length <= 0:
            raise ConfigError("grid half_length must be positive")
    if cfg.tol <= 0 or cfg.tol > 1e-2:
        raise ConfigError(f"solver tol must lie in (0, 1e-2], got {cfg.tol}")
    if cfg.max_iterations < 1:
        raise ConfigError("max_iterations must be positive")
    if cfg.model_mode not in _MODEL_MODES:
        raise ConfigError(f"model_mode must be one of {sorted(_MODEL_MODES)}")
    if not (0 < cfg.rel_final <= 1 and 0 < cfg.rel_extrap <= 1):
        raise ConfigError("rel_final and rel_extrap must lie in (0, 1]")
    if not cfg.radii or any(r <= 0 for r in cfg.radii):
        raise ConfigError("localization radii must be positive")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")


def emit_config(cfg: RunConfig) -> str:
    """Serialize a config in normalized form (the round-trip fixpoint)."""
    parser = configparser.ConfigParser()

    def profile_section(name: str, p: ProfileConfig) -> None:
        parser.add_section(name)
        parser[name]["kind"] = p.kind
        if p.kind == "catalog":
            parser[name]["name"] = p.name
            parser[name]["params"] = ", ".join(f"{x:g}" for x in p.params)
        else:
            parser[name]["expr"] = p.expr
            parser[name]["principal"] = p.principal
            parser[name]["degree"] = f"{p.degree:g}"
            if p.margin is not None:
                parser[name]["margin"] = f"{p.margin:g}"

    profile_section("symbol", cfg.symbol)
    profile_section("weight", cfg.weight)
    parser.add_section("problem")
    parser["problem"]["dimension"] = str(cfg.dimension)
    parser["problem"]["alphas"] = ", ".join(f"{a:g}" for a in cfg.alphas)
    parser["problem"]["eigen_count"] = str(cfg.eigen_count)
    parser.add_section("grid")
    parser["grid"]["mode"] = cfg.grid_mode
    if cfg.grid_mode == "manual":
        parser["grid"]["n"] = str(cfg.grid_n)
        parser["grid"]["half_length"] = f"{cfg.grid_half_length:g}"
    parser.add_section("solver")
    parser["solver"]["tol"] = f"{cfg.tol:g}"
    parser["solver"]["max_iterations"] = str(cfg.max_iterations)
    parser["solver"]["seed"] = str(cfg.seed)
    parser["solver"]["model_mode"] = cfg.model_mode
    parser.add_section("tolerances")
    parser["tolerances"]["rel_final"] = f"{cfg.rel_final:g}"
    parser["tolerances"]["rel_extrap"] = f"{cfg.rel_extrap:g}"
    parser.add_section("localization")
    parser["localization"]["radii"] = ", ".join(f"{r:g}" for r in cfg.radii)
    parser.add_section("output")
    parser["output"]["emit_eigenfunctions"] = "true" if cfg.emit_eigenfunctions else "false"
    parser.add_section("run")
    parser["run"]["threads"] = str(cfg.threads)

    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def _build_profile(p: ProfileConfig, d: int, role: ProfileRole) -> ProfileSpec:
    try:
        if p.kind == "catalog":
            return make_catalog_profile(p.name, list(p.params), d, role=role)
        return expression_profile(
            p.expr, p.principal, p.degree, d, role=role, lower_bound_margin=p.margin
        )
    except (ProfileError, ExpressionError) as exc:
        raise ConfigError(str(exc)) from exc


def build_profiles(cfg: RunConfig) -> ProfilePair:
    """Instantiate the configured symbol/weight pair."""
    a = _build_profile(cfg.symbol, cfg.dimension, ProfileRole.SYMBOL_A)
    v = _build_profile(cfg.weight, cfg.dimension, ProfileRole.WEIGHT_V)
    try:
        return make_pair(a, v)
    except ProfileError as exc:
        raise ConfigError(str(exc)) from exc


def model_mode_of(cfg: RunConfig) -> Mode | None:
    return _MODEL_MODES[cfg.model_mode]


DEFAULT_CONFIG = emit_config(RunConfig())

"""Alpha sweeps, scaled spectral gaps, extrapolation and verdicts.

The central quantity is the scaled spectral gap

    gap_n(alpha) = alpha^-sigma * (A0*V0^2 - lambda_n(alpha)),

whose limit as alpha -> 0 is the n-th ascending eigenvalue mu_n of the
model operator.  A limit is not machine-checkable, so the law is
restated as a three-part finite-alpha criterion: the final ladder point
must sit within ``rel_final`` of mu_n, the fitted extrapolation limit
within ``rel_extrap``, and |gap_n - mu_n| must be nonincreasing along
the ladder (the last check is advisory and downgrades to "inconclusive"
rather than failing, since the approach direction at finite alpha is
not guaranteed).  A one-sided bound gap_n <= mu_n*(1+slack) is checked
alongside, matching the limsup inequality the gap satisfies.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import __version__ as _pkg_version
from .eigensolve import (
    EigenPair,
    Mode,
    NoConvergenceError,
    SolveSettings,
    largest_eigenpairs,
    smallest_eigenpairs,
)
from .grid import Grid, norm, suggest_grid, to_frequency_values
from .operators import (
    build_model_operator,
    build_scaled_operator,
    make_scaled_symbols,
    normalized_pair,
)
from .profiles import ProfilePair

__all__ = [
    "LocalizationMetrics",
    "SweepRecord",
    "ExtrapolationResult",
    "Verdict",
    "VerdictStatus",
    "StudyReport",
    "SweepSettings",
    "scaled_gap",
    "extrapolate_limit",
    "localization_metrics",
    "run_sweep",
    "verify_limit_law",
]


class VerdictStatus(enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class LocalizationMetrics:
    """How concentrated an eigenfunction is, in both domains.

    Masses are fractions of the squared norm outside the centered ball
    of each radius; ``k_form``/``s_form`` are the frequency/position
    flatness forms whose sum equals the scaled gap exactly in the
    discrete model.  ``c_hat_*`` are the empirical constants
    outside_mass * R^degree / mu implied by the localization bounds (the
    true constants are existential, so only these ladders are reported).
    """

    radii: tuple[float, ...]
    position_mass_outside: tuple[float, ...]
    frequency_mass_outside: tuple[float, ...]
    k_form: float
    s_form: float
    identity_target: float
    identity_rel_gap: float
    c_hat_pos: tuple[float, ...]
    c_hat_freq: tuple[float, ...]


@dataclass(frozen=True)
class SweepRecord:
    alpha: float
    n: int
    lam: float
    scaled_gap: float
    residual: float
    grid_id: str
    converged: bool = True
    note: str = ""
    localization: LocalizationMetrics | None = None
    vector: object | None = None  # StateVector when the sweep keeps eigenfunctions


@dataclass(frozen=True)
class ExtrapolationResult:
    limit: float
    rate: float
    fit_residual: float
    degenerate: bool = False
    note: str = ""


@dataclass(frozen=True)
class Verdict:
    n: int
    status: VerdictStatus
    mu: float
    final_rel_err: float
    extrap_rel_err: float
    monotone_ok: bool
    one_sided_ok: bool
    rel_final: float
    rel_extrap: float
    reasons: tuple[str, ...] = ()


@dataclass
class StudyReport:
    config: dict
    model_eigenvalues: list[tuple[float, float]]  # (mu, residual), ascending
    records: list[SweepRecord]
    extrapolations: dict[int, ExtrapolationResult]
    verdicts: list[Verdict]
    provenance: dict

    def to_dict(self) -> dict:
        return {
            "schema": "specgap.report.v1",
            "config": self.config,
            "model_eigenvalues": [
                {"n": i + 1, "mu": mu, "residual": res}
                for i, (mu, res) in enumerate(self.model_eigenvalues)
            ],
            "records": [
                {
                    "alpha": r.alpha,
                    "n": r.n,
                    "lambda": r.lam,
                    "scaled_gap": r.scaled_gap,
                    "residual": r.residual,
                    "grid_id": r.grid_id,
                    "converged": r.converged,
                    "note": r.note,
                    "localization": None
                    if r.localization is None
                    else {
                        "radii": list(r.localization.radii),
                        "position_mass_outside": list(r.localization.position_mass_outside),
                        "frequency_mass_outside": list(r.localization.frequency_mass_outside),
                        "k_form": r.localization.k_form,
                        "s_form": r.localization.s_form,
                        "identity_target": r.localization.identity_target,
                        "identity_rel_gap": r.localization.identity_rel_gap,
                        "c_hat_pos": list(r.localization.c_hat_pos),
                        "c_hat_freq": list(r.localization.c_hat_freq),
                    },
                }
                for r in self.records
            ],
            "extrapolations": {
                str(n): {
                    "limit": e.limit,
                    "rate": e.rate,
                    "fit_residual": e.fit_residual,
                    "degenerate": e.degenerate,
                    "note": e.note,
                }
                for n, e in self.extrapolations.items()
            },
            "verdicts": [
                {
                    "n": v.n,
                    "status": v.status.value,
                    "mu": v.mu,
                    "final_rel_err": v.final_rel_err,
                    "extrap_rel_err": v.extrap_rel_err,
                    "monotone_ok": v.monotone_ok,
                    "one_sided_ok": v.one_sided_ok,
                    "rel_final": v.rel_final,
                    "rel_extrap": v.rel_extrap,
                    "reasons": list(v.reasons),
                }
                for v in self.verdicts
            ],
            "provenance": self.provenance,
        }


@dataclass(frozen=True)
class SweepSettings:
    """Everything a sweep needs besides the pair, the ladder and k."""

    solver: SolveSettings = field(default_factory=lambda: SolveSettings(tol=1e-9))
    model_mode: Mode | None = None
    grid: Grid | None = None
    radii: tuple[float, ...] = (2.0, 4.0, 8.0)
    rel_final: float = 0.05
    rel_extrap: float = 0.02
    threads: int = 1
    keep_vectors: bool = False


def scaled_gap(lam: float, alpha: float, pair: ProfilePair) -> float:
    """alpha^-sigma * (A0*V0^2 - lambda)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return float(alpha ** (-pair.sigma) * (pair.peak_product - lam))


# ---------------------------------------------------------------------------
# Extrapolation
# ---------------------------------------------------------------------------

_RATE_BRACKET = (1e-3, 32.0)


def _power_fit(alphas: np.ndarray, gaps: np.ndarray, rate: float):
    design = np.column_stack([np.ones_like(alphas), alphas**rate])
    coef, *_ = np.linalg.lstsq(design, gaps, rcond=None)
    rms = float(np.sqrt(np.mean((design @ coef - gaps) ** 2)))
    return coef, rms


def extrapolate_limit(alphas: Sequence[float], gaps: Sequence[float]) -> ExtrapolationResult:
    """Fit gap(alpha) = limit + c * alpha^rate and return the limit.

    The rate comes from an exact three-point solve (first, middle and
    last ladder points) refined by a least-squares search over the full
    ladder, so synthetic data of exactly this form reproduces the limit
    to floating-point accuracy.  Non-monotone ladders cannot carry the
    model; they are flagged degenerate and the last gap is returned as
    the limit estimate.
    """
    a = np.asarray(list(alphas), dtype=float)
    g = np.asarray(list(gaps), dtype=float)
    if a.size < 3:
        raise ValueError("extrapolation needs at least 3 ladder points")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(g))):
        raise ValueError("ladder contains non-finite entries")
    if not np.all(np.diff(a) < 0):
        raise ValueError("alphas must be strictly decreasing")

    scale = float(np.max(np.abs(g))) or 1.0
    diffs = np.diff(g)
    if np.all(np.abs(diffs) <= 1e-14 * scale):
        return ExtrapolationResult(limit=float(np.mean(g)), rate=float("nan"),
                                   fit_residual=0.0, note="constant ladder")
    tol_m = 1e-12 * scale
    if not (np.all(diffs >= -tol_m) or np.all(diffs <= tol_m)):
        return ExtrapolationResult(
            limit=float(g[-1]),
            rate=float("nan"),
            fit_residual=float("nan"),
            degenerate=True,
            note="non-monotone ladder; falling back to the last point",
        )

    i, j, l = 0, a.size // 2, a.size - 1
    rate0 = None
    denom = g[j] - g[l]
    if abs(denom) > 1e-14 * scale:
        ratio = (g[i] - g[j]) / denom

        def three_point_gap(r: float) -> float:
            return (a[i] ** r - a[j] ** r) / (a[j] ** r - a[l] ** r) - ratio

        lo, hi = _RATE_BRACKET
        try:
            if three_point_gap(lo) * three_point_gap(hi) < 0:
                rate0 = float(brentq(three_point_gap, lo, hi, xtol=1e-15, rtol=8.9e-16))
        except ValueError:
            rate0 = None

    candidates = []
    if rate0 is not None:
        candidates.append(rate0)
    # Coarse scan + bounded refinement over the full ladder.
    scan = np.geomspace(*_RATE_BRACKET, 200)
    best_scan = min(scan, key=lambda r: _power_fit(a, g, r)[1])
    refined = minimize_scalar(
        lambda r: _power_fit(a, g, r)[1],
        bounds=(best_scan / 2, best_scan * 2),
        method="bounded",
        options={"xatol": 1e-13},
    )
    candidates.append(float(refined.x))

    best_rate = min(candidates, key=lambda r: _power_fit(a, g, r)[1])
    coef, rms = _power_fit(a, g, best_rate)
    return ExtrapolationResult(limit=float(coef[0]), rate=best_rate, fit_residual=rms)


# ---------------------------------------------------------------------------
# Localization diagnostics
# ---------------------------------------------------------------------------

def localization_metrics(
    pair: ProfilePair,
    alpha: float,
    eigpair: EigenPair,
    radii: Sequence[float],
    mu: float | None = None,
) -> LocalizationMetrics:
    """Outside-masses, flatness forms and the exact gap identity.

    ``eigpair`` must come from the scaled-operator solve at the same
    alpha.  The identity k_form + s_form = alpha^-sigma * (1 - lambda)
    (with unit-normalized maxima) is recomputed and its relative gap
    reported.  Radii may arrive in any order; the output is sorted
    ascending.
    """
    norm_pair, scale = normalized_pair(pair)
    grid = eigpair.vector.grid
    radii_sorted = tuple(sorted(float(r) for r in radii))
    psi = eigpair.vector
    total = norm(psi) ** 2
    sym = make_scaled_symbols(norm_pair, alpha, grid)

    pos_r = grid.position_radii
    frq_r = grid.frequency_radii
    abs_sq = np.abs(psi.values) ** 2
    hat_sq = np.abs(to_frequency_values(grid, psi.values)) ** 2
    pos_out = tuple(
        float(grid.cell_volume * np.sum(abs_sq[pos_r > r]) / total) for r in radii_sorted
    )
    frq_out = tuple(
        float(grid.freq_cell_volume * np.sum(hat_sq[frq_r > r]) / total) for r in radii_sorted
    )

    theta = sym.weight_values * psi.values
    theta_hat_sq = np.abs(to_frequency_values(grid, theta)) ** 2
    pref = alpha ** (-norm_pair.sigma)
    k_form = float(
        pref * grid.freq_cell_volume * np.sum((1.0 - sym.multiplier_values) * theta_hat_sq) / total
    )
    s_form = float(
        pref * grid.cell_volume * np.sum((1.0 - sym.weight_values**2) * abs_sq) / total
    )

    lam_normalized = eigpair.value / scale
    target = float(pref * (1.0 - lam_normalized))
    identity_rel = abs(k_form + s_form - target) / max(abs(target), 1e-300)

    gamma = pair.a_profile.degree
    beta = pair.v_profile.degree
    mu_proxy = (mu / scale) if mu is not None else max(target, 1e-300)
    c_hat_pos = tuple(out * r**beta / mu_proxy for out, r in zip(pos_out, radii_sorted))
    c_hat_freq = tuple(out * r**gamma / mu_proxy for out, r in zip(frq_out, radii_sorted))

    return LocalizationMetrics(
        radii=radii_sorted,
        position_mass_outside=pos_out,
        frequency_mass_outside=frq_out,
        k_form=k_form,
        s_form=s_form,
        identity_target=target,
        identity_rel_gap=identity_rel,
        c_hat_pos=c_hat_pos,
        c_hat_freq=c_hat_freq,
    )


# ---------------------------------------------------------------------------
# The sweep
# ---------------------------------------------------------------------------

def run_sweep(
    pair: ProfilePair,
    alphas: Sequence[float],
    k: int,
    settings: SweepSettings | None = None,
) -> StudyReport:
    """Solve the top-k spectrum along a decreasing alpha ladder, compare
    the scaled gaps against the model spectrum and attach verdicts.

    Solver non-convergence at an individual (alpha, n) produces a
    flagged record and an inconclusive verdict for the affected index,
    not a crash.  Maxima are normalized to 1 internally (the sandwich
    scales linearly, so eigenvalues rescale exactly); the report records
    the rescaling.
    """
    settings = settings or SweepSettings()
    alphas = [float(x) for x in alphas]
    if len(alphas) < 3:
        raise ValueError("the alpha ladder needs at least 3 strictly decreasing entries")
    if not all(b < a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be strictly decreasing")
    if any(x <= 0 for x in alphas):
        raise ValueError("alphas must be positive")
    if k < 1:
        raise ValueError("k must be at least 1")

    norm_pair, scale = normalized_pair(pair)
    if settings.grid is not None:
        grid = settings.grid
        grid_reasoning: tuple[str, ...] = ("grid supplied explicitly",)
    else:
        suggestion = suggest_grid(norm_pair, k=k, alphas=alphas)
        grid = suggestion.build()
        grid_reasoning = suggestion.reasoning
    grid_id = grid.describe()

    model_settings = replace(settings.solver, k=k, mode=settings.model_mode)
    model_pairs = smallest_eigenpairs(build_model_operator(norm_pair, grid), model_settings)
    model_eigenvalues = [(scale * p.value, scale * p.residual) for p in model_pairs]
    mus = [mu for mu, _ in model_eigenvalues]

    solve_settings = replace(settings.solver, k=k, mode=Mode.LANCZOS_TOP)

    def solve_one(alpha: float) -> list[SweepRecord]:
        op = build_scaled_operator(norm_pair, alpha, grid)
        try:
            pairs = largest_eigenpairs(op, solve_settings)
        except NoConvergenceError as exc:
            return [
                SweepRecord(
                    alpha=alpha,
                    n=n,
                    lam=float("nan"),
                    scaled_gap=float("nan"),
                    residual=float("nan"),
                    grid_id=grid_id,
                    converged=False,
                    note=str(exc),
                )
                for n in range(1, k + 1)
            ]
        records = []
        for n, eig in enumerate(pairs, start=1):
            lam = scale * eig.value
            loc = localization_metrics(
                pair, alpha, EigenPair(lam, eig.vector, eig.residual), settings.radii,
                mu=mus[n - 1],
            )
            records.append(
                SweepRecord(
                    alpha=alpha,
                    n=n,
                    lam=lam,
                    scaled_gap=scaled_gap(lam, alpha, pair),
                    residual=scale * eig.residual,
                    grid_id=grid_id,
                    converged=True,
                    localization=loc,
                    vector=eig.vector if settings.keep_vectors else None,
                )
            )
        return records

    if settings.threads > 1:
        with ThreadPoolExecutor(max_workers=settings.threads) as pool:
            chunks = list(pool.map(solve_one, alphas))
    else:
        chunks = [solve_one(alpha) for alpha in alphas]

    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda r: (-r.alpha, r.n))

    extrapolations: dict[int, ExtrapolationResult] = {}
    for n in range(1, k + 1):
        series = [(r.alpha, r.scaled_gap) for r in records if r.n == n and r.converged]
        if len(series) >= 3:
            xs, ys = zip(*series)
            extrapolations[n] = extrapolate_limit(xs, ys)

    report = StudyReport(
        config={
            "alphas": alphas,
            "k": k,
            "radii": list(settings.radii),
            "rel_final": settings.rel_final,
            "rel_extrap": settings.rel_extrap,
            "profiles": {
                "symbol": pair.a_profile.label,
                "weight": pair.v_profile.label,
                "dimension": pair.dimension,
                "sigma": pair.sigma,
            },
        },
        model_eigenvalues=model_eigenvalues,
        records=records,
        extrapolations=extrapolations,
        verdicts=[],
        provenance={
            "package_version": _pkg_version,
            "rng_seed": settings.solver.rng_seed,
            "solver_tol": settings.solver.tol,
            "grid": grid_id,
            "grid_reasoning": list(grid_reasoning),
            "max_rescaling": scale,
            "threads": settings.threads,
        },
    )
    report.verdicts = verify_limit_law(
        report, rel_final=settings.rel_final, rel_extrap=settings.rel_extrap
    )
    return report


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

def verify_limit_law(
    report: StudyReport, rel_final: float = 0.05, rel_extrap: float = 0.02
) -> list[Verdict]:
    """Evaluate the three-part finite-alpha criterion per index.

    PASS requires the final-point and extrapolated relative errors to be
    within their tolerances, the error ladder to be nonincreasing, the
    one-sided upper bound to hold at the smallest alpha, and no gap to
    be negative beyond solver slack.  Non-monotonicity alone downgrades
    to INCONCLUSIVE (the approach direction is not guaranteed); anything
    else that misses is a FAIL.  Every verdict carries its reasons.
    """
    verdicts: list[Verdict] = []
    k = max((r.n for r in report.records), default=0)
    for n in range(1, k + 1):
        recs = sorted((r for r in report.records if r.n == n), key=lambda r: -r.alpha)
        mu = report.model_eigenvalues[n - 1][0] if len(report.model_eigenvalues) >= n else None
        if mu is None or mu <= 0:
            verdicts.append(
                Verdict(n, VerdictStatus.INCONCLUSIVE, float("nan"), float("nan"),
                        float("nan"), False, False, rel_final, rel_extrap,
                        ("model eigenvalue unavailable",))
            )
            continue
        reasons: list[str] = []
        bad = [r for r in recs if not r.converged]
        if bad:
            reasons.append(
                "inconclusive: solver did not converge at alpha="
                + ", ".join(f"{r.alpha:g}" for r in bad)
            )
            verdicts.append(
                Verdict(n, VerdictStatus.INCONCLUSIVE, mu, float("nan"), float("nan"),
                        False, False, rel_final, rel_extrap, tuple(reasons))
            )
            continue
        if len(recs) < 3:
            verdicts.append(
                Verdict(n, VerdictStatus.INCONCLUSIVE, mu, float("nan"), float("nan"),
                        False, False, rel_final, rel_extrap,
                        ("inconclusive: insufficient ladder",))
            )
            continue

        sigma_slack = [
            10.0 * r.residual * r.alpha ** (-_sigma_of(report)) + 1e-12 * mu for r in recs
        ]
        negative = [
            r for r, s in zip(recs, sigma_slack) if r.scaled_gap < -s
        ]
        if negative:
            worst = negative[0]
            verdicts.append(
                Verdict(n, VerdictStatus.FAIL, mu, float("nan"), float("nan"), False, False,
                        rel_final, rel_extrap,
                        (f"negative scaled gap at alpha={worst.alpha:g} "
                         f"(lambda above the spectral bound)",))
            )
            continue

        final = recs[-1]
        final_rel = abs(final.scaled_gap - mu) / mu
        final_ok = final_rel <= rel_final
        if not final_ok:
            reasons.append(
                f"final-point error {final_rel:.3%} exceeds rel_final {rel_final:.3%}"
            )

        extr = report.extrapolations.get(n)
        if extr is None or extr.degenerate:
            extrap_rel = final_rel
            if extr is not None and extr.degenerate:
                reasons.append("degenerate fit; extrapolation check fell back to the last point")
        else:
            extrap_rel = abs(extr.limit - mu) / mu
        extrap_ok = extrap_rel <= rel_extrap
        if not extrap_ok:
            reasons.append(
                f"extrapolated-limit error {extrap_rel:.3%} exceeds rel_extrap {rel_extrap:.3%}"
            )

        errs = [abs(r.scaled_gap - mu) for r in recs]
        mono_ok = all(
            err_next <= err_prev + s_prev + s_next
            for err_prev, err_next, s_prev, s_next in zip(
                errs, errs[1:], sigma_slack, sigma_slack[1:]
            )
        )
        if not mono_ok:
            reasons.append("error ladder |gap - mu| is not nonincreasing")

        one_slack = max(final.residual * final.alpha ** (-_sigma_of(report)), 1e-3)
        one_sided_ok = final.scaled_gap <= mu * (1.0 + one_slack)
        if not one_sided_ok:
            reasons.append(
                f"one-sided bound violated: gap {final.scaled_gap:.6g} exceeds "
                f"mu*(1+{one_slack:.2g})"
            )

        if final_ok and extrap_ok and one_sided_ok and mono_ok:
            status = VerdictStatus.PASS
        elif final_ok and extrap_ok and one_sided_ok:
            status = VerdictStatus.INCONCLUSIVE
        else:
            status = VerdictStatus.FAIL
        verdicts.append(
            Verdict(
                n=n,
                status=status,
                mu=mu,
                final_rel_err=final_rel,
                extrap_rel_err=extrap_rel,
                monotone_ok=mono_ok,
                one_sided_ok=one_sided_ok,
                rel_final=rel_final,
                rel_extrap=rel_extrap,
                reasons=tuple(reasons),
            )
        )
    return verdicts


def _sigma_of(report: StudyReport) -> float:
    return float(report.config.get("profiles", {}).get("sigma", 1.0))

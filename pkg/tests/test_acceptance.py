"""Acceptance gate: every criterion gets a test that prints one
PASS/FAIL line (run with `pytest tests/test_acceptance.py -v -s`).

Shared heavy artifacts (the 4-point Gaussian-pair study) are built once
per session and reused by the criteria that inspect them.
"""

import time

import numpy as np
import pytest

from specgap import (
    Mode,
    ProfileRole,
    SolveSettings,
    SweepSettings,
    VerdictStatus,
    build_grid,
    build_model_operator,
    build_multiplier_plus_potential,
    build_original_operator,
    build_scaled_operator,
    inner,
    largest_eigenpairs,
    make_catalog_profile,
    make_pair,
    make_scaled_symbols,
    model_form,
    norm,
    random_state,
    residual_form,
    run_sweep,
    smallest_eigenpairs,
    state,
    symbol_flatness_form,
    weight_flatness_form,
)
from specgap.eigensolve import materialize_dense

ROOT2 = np.sqrt(2.0)
LADDER = (0.2, 0.1, 0.05, 0.025)
REL_FINAL = 0.05
REL_EXTRAP = 0.02


def announce(number: int, ok: bool, detail: str) -> None:
    print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} - {detail}")


def gaussian_pair_1d():
    return make_pair(
        make_catalog_profile("gaussian_power", [2], 1),
        make_catalog_profile("gaussian_power", [2], 1, role=ProfileRole.WEIGHT_V),
    )


@pytest.fixture(scope="session")
def gaussian_study():
    """Criterion 2's run, shared with criteria 6 and 7."""
    pair = gaussian_pair_1d()
    grid = build_grid(1, 1024, 20.0)
    start = time.perf_counter()
    report = run_sweep(
        pair,
        LADDER,
        3,
        SweepSettings(
            solver=SolveSettings(k=3, tol=1e-9),
            grid=grid,
            radii=(2.0, 4.0, 8.0),
            rel_final=REL_FINAL,
            rel_extrap=REL_EXTRAP,
        ),
    )
    elapsed = time.perf_counter() - start
    return report, elapsed


def test_criterion_1_model_spectrum_harmonic_oracle():
    """Lowest five model eigenvalues match sqrt(2)*(2n-1) to 1e-6."""
    pair = gaussian_pair_1d()
    grid = build_grid(1, 1024, 20.0)
    start = time.perf_counter()
    pairs = smallest_eigenpairs(
        build_model_operator(pair, grid), SolveSettings(k=5, tol=1e-9)
    )
    elapsed = time.perf_counter() - start
    exact = ROOT2 * (2 * np.arange(1, 6) - 1)
    rel_errors = [abs(p.value - mu) / mu for p, mu in zip(pairs, exact)]
    ok = max(rel_errors) <= 1e-6 and elapsed <= 10.0
    announce(1, ok, f"max relative error {max(rel_errors):.2e}, runtime {elapsed:.1f}s")
    assert max(rel_errors) <= 1e-6
    assert elapsed <= 10.0


def test_criterion_2_scaled_gap_law_gaussian_pair(gaussian_study):
    """Gaussian pair, ladder 0.2..0.025, n=1..3: verdicts PASS at
    rel_final=0.05 / rel_extrap=0.02 with a nonincreasing error ladder."""
    report, elapsed = gaussian_study
    details = []
    for v in report.verdicts:
        details.append(
            f"n={v.n}: {v.status.value} final={v.final_rel_err:.3%} "
            f"extrap={v.extrap_rel_err:.3%} monotone={v.monotone_ok}"
        )
    all_pass = all(v.status is VerdictStatus.PASS for v in report.verdicts)
    announce(2, all_pass and elapsed <= 120.0, "; ".join(details) + f"; runtime {elapsed:.1f}s")
    assert elapsed <= 120.0
    assert all(v.monotone_ok for v in report.verdicts), "error ladder must be nonincreasing"
    assert all_pass, (
        "scaled-gap verdicts against mu = sqrt(2)*(2n-1): " + "; ".join(details)
    )


def test_criterion_3_mixed_degree_two_resolution_oracle():
    """gamma=4/beta=2: dense two-resolution agreement to 1e-7 and a
    passing sweep verdict for n=1."""
    pair = make_pair(
        make_catalog_profile("gaussian_power", [4], 1),
        make_catalog_profile("gaussian_power", [2], 1, role=ProfileRole.WEIGHT_V),
    )
    values = {}
    for n in (1024, 2048):
        grid = build_grid(1, n, 30.0)
        values[n] = smallest_eigenpairs(
            build_model_operator(pair, grid),
            SolveSettings(k=1, tol=1e-9, mode=Mode.DENSE_FULL),
        )[0].value
    two_res = abs(values[1024] - values[2048]) / values[2048]

    report = run_sweep(
        pair,
        LADDER,
        1,
        SweepSettings(
            solver=SolveSettings(k=1, tol=1e-9),
            grid=build_grid(1, 1024, 20.0),
            rel_final=REL_FINAL,
            rel_extrap=REL_EXTRAP,
        ),
    )
    verdict = report.verdicts[0]
    ok = two_res <= 1e-7 and verdict.status is VerdictStatus.PASS
    announce(
        3,
        ok,
        f"mu1={values[2048]:.9g}, two-resolution rel diff {two_res:.2e}, "
        f"sweep verdict {verdict.status.value} (final={verdict.final_rel_err:.3%})",
    )
    assert two_res <= 1e-7
    assert verdict.status is VerdictStatus.PASS


def test_criterion_4_exact_discrete_identities():
    """Gap and defect identities to 1e-12 on 100 seeded random vectors;
    flatness forms nonnegative; Hermitian contract on every handle."""
    pair = gaussian_pair_1d()
    grid = build_grid(1, 512, 14.0)
    alpha = 0.17
    sym = make_scaled_symbols(pair, alpha, grid)
    sandwich = build_scaled_operator(pair, alpha, grid)
    handles = [
        sandwich,
        build_original_operator(pair, alpha, grid),
        build_model_operator(pair, grid),
        build_multiplier_plus_potential(
            grid,
            np.random.default_rng(0).random(grid.shape),
            np.random.default_rng(1).random(grid.shape),
        ),
    ]
    rng = np.random.default_rng(20240817)
    start = time.perf_counter()
    worst_gap = worst_defect = worst_herm = 0.0
    for _ in range(100):
        u = random_state(grid, rng)
        v = random_state(grid, rng)
        w = state(grid, sym.weight_values * u.values)
        y = state(grid, sym.weight_values * v.values)

        lhs = (inner(u, v) - inner(sandwich.apply(u), v)) / alpha**pair.sigma
        k_uv = symbol_flatness_form(pair, alpha, w, y, symbols=sym)
        s_uv = weight_flatness_form(pair, alpha, u, v, symbols=sym)
        gap_err = abs(lhs - (k_uv + s_uv)) / max(abs(lhs), abs(k_uv), abs(s_uv))
        worst_gap = max(worst_gap, gap_err)

        k_u = symbol_flatness_form(pair, alpha, w, symbols=sym).real
        s_u = weight_flatness_form(pair, alpha, u, symbols=sym).real
        assert k_u >= 0.0 and s_u >= 0.0
        lhs_defect = residual_form(pair, alpha, u)
        rhs_defect = alpha**pair.sigma * (model_form(pair, u).real - k_u - s_u)
        defect_err = abs(lhs_defect - rhs_defect) / max(
            abs(lhs_defect), abs(rhs_defect), 1e-30
        )
        worst_defect = max(worst_defect, defect_err)

        for op in handles:
            scale = max(1.0, op.upper_bound or 1.0) * norm(u) * norm(v)
            herm = abs(inner(op.apply(u), v) - inner(u, op.apply(v))) / scale
            worst_herm = max(worst_herm, herm)
    elapsed = time.perf_counter() - start
    ok = worst_gap <= 1e-12 and worst_defect <= 1e-12 and worst_herm <= 1e-12
    announce(
        4,
        ok and elapsed <= 10.0,
        f"gap identity {worst_gap:.2e}, defect identity {worst_defect:.2e}, "
        f"hermitian {worst_herm:.2e}, runtime {elapsed:.1f}s",
    )
    assert worst_gap <= 1e-12
    assert worst_defect <= 1e-12
    assert worst_herm <= 1e-12
    assert elapsed <= 10.0


def test_criterion_5_solver_oracle_equivalence_and_determinism():
    """20 seeded multiplier+potential operators at N=256: iterative
    solves match the dense decomposition to 10*tol; reruns with the same
    seed are bit-identical."""
    grid = build_grid(1, 256, 10.0)
    tol = 1e-9
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(5000 + seed)
        op = build_multiplier_plus_potential(
            grid, rng.random(grid.shape) * 3.0, rng.random(grid.shape) * 2.0
        )
        scale = max(1.0, op.upper_bound)
        dense_vals = np.linalg.eigvalsh(materialize_dense(op))

        top_settings = SolveSettings(k=3, tol=tol, rng_seed=seed)
        top = largest_eigenpairs(op, top_settings)
        for p, ref in zip(top, dense_vals[-3:][::-1]):
            worst = max(worst, abs(p.value - ref) / (10 * tol * scale))

        bottom_settings = SolveSettings(
            k=3, tol=tol, rng_seed=seed, mode=Mode.SHIFT_INVERT_BOTTOM
        )
        bottom = smallest_eigenpairs(op, bottom_settings)
        for p, ref in zip(bottom, dense_vals[:3]):
            worst = max(worst, abs(p.value - ref) / (10 * tol * scale))

        top_again = largest_eigenpairs(op, top_settings)
        bottom_again = smallest_eigenpairs(op, bottom_settings)
        assert [p.value for p in top] == [p.value for p in top_again]
        assert [p.value for p in bottom] == [p.value for p in bottom_again]
        for a, b in zip(top + bottom, top_again + bottom_again):
            np.testing.assert_array_equal(a.vector.values, b.vector.values)

    ok = worst <= 1.0
    announce(5, ok, f"worst |iterative - dense| at {worst:.3f} of the 10*tol budget")
    assert worst <= 1.0


def test_criterion_6_one_sided_bound_at_smallest_alpha(gaussian_study):
    """At alpha=0.025 the scaled gaps stay below mu*(1.001) + solver slack."""
    report, _ = gaussian_study
    details = []
    ok = True
    for v in report.verdicts:
        rec = next(r for r in report.records if r.n == v.n and r.alpha == 0.025)
        slack = rec.residual * 0.025 ** (-1.0)
        bound = v.mu * 1.001 + slack
        good = rec.scaled_gap <= bound
        ok = ok and good
        details.append(f"n={v.n}: gap={rec.scaled_gap:.6f} <= {bound:.6f}: {good}")
    announce(6, ok, "; ".join(details))
    assert ok


def test_criterion_7_localization_diagnostics(gaussian_study):
    """At alpha=0.025, n=1: outside masses at R in {2,4,8} below 0.5 and
    strictly decreasing in both domains; gap identity to 1e-10."""
    report, _ = gaussian_study
    rec = next(r for r in report.records if r.n == 1 and r.alpha == 0.025)
    loc = rec.localization
    pos, frq = loc.position_mass_outside, loc.frequency_mass_outside
    monotone = pos[0] > pos[1] > pos[2] and frq[0] > frq[1] > frq[2]
    small = max(pos[0], frq[0]) <= 0.5
    identity = loc.identity_rel_gap <= 1e-10
    ok = monotone and small and identity
    announce(
        7,
        ok,
        f"pos masses {[f'{m:.2e}' for m in pos]}, frq masses {[f'{m:.2e}' for m in frq]}, "
        f"identity rel gap {loc.identity_rel_gap:.2e}",
    )
    assert small, "outside masses at R=2 must stay below 0.5"
    assert monotone, "outside masses must strictly decrease in R"
    assert identity


def test_criterion_8_principal_part_sufficiency(gaussian_study):
    """Rational symbol 1/(1+xi^2) with the Gaussian weight shares the
    principal parts, so it must pass against the same model targets."""
    report_gauss, _ = gaussian_study
    pair = make_pair(
        make_catalog_profile("rational_power", [2], 1),
        make_catalog_profile("gaussian_power", [2], 1, role=ProfileRole.WEIGHT_V),
    )
    report = run_sweep(
        pair,
        LADDER,
        3,
        SweepSettings(
            solver=SolveSettings(k=3, tol=1e-9),
            grid=build_grid(1, 1024, 20.0),
            rel_final=REL_FINAL,
            rel_extrap=REL_EXTRAP,
        ),
    )
    # identical principal parts give identical model targets
    for (mu_r, _), (mu_g, _) in zip(report.model_eigenvalues, report_gauss.model_eigenvalues):
        assert mu_r == pytest.approx(mu_g, rel=1e-12)
    details = [
        f"n={v.n}: {v.status.value} final={v.final_rel_err:.3%} extrap={v.extrap_rel_err:.3%}"
        for v in report.verdicts
    ]
    all_pass = all(v.status is VerdictStatus.PASS for v in report.verdicts)
    announce(8, all_pass, "; ".join(details))
    assert all_pass, (
        "rational-symbol verdicts against the shared targets: " + "; ".join(details)
    )

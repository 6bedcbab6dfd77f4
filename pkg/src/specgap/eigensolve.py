"""Hermitian eigensolvers with residual certification.

Three modes:

* ``LANCZOS_TOP`` -- Lanczos with full reorthogonalization, restarted
  with deflation of converged pairs until the requested extreme
  eigenpairs are certified.  Grid sizes here are modest, so full (not
  selective) reorthogonalization is used throughout; ghost eigenvalues
  would poison an asymptotic sweep.
* ``DENSE_FULL`` -- materialize the operator column by column and call
  LAPACK; permitted only up to 4096 unknowns.
* ``SHIFT_INVERT_BOTTOM`` -- Lanczos on (A + c I)^-1 with inner
  conjugate-gradient solves, matrix-free; residuals are certified
  against the original operator.

All randomness flows from the seed in :class:`SolveSettings`; identical
settings produce bit-identical results within one build.
"""

from __future__ import annotations

import enum
import inspect
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, cg

from .grid import StateVector
from .operators import HermitianOperator

__all__ = [
    "Mode",
    "SolveSettings",
    "EigenPair",
    "CertReport",
    "NoConvergenceError",
    "InnerSolveStallError",
    "largest_eigenpairs",
    "smallest_eigenpairs",
    "certify",
    "cluster_eigenvalues",
    "DENSE_SIZE_LIMIT",
]

DENSE_SIZE_LIMIT = 4096
# Lanczos may not ask for more than this fraction of the grid dimension.
MAX_SUBSPACE_FRACTION = 0.25


class Mode(enum.Enum):
    LANCZOS_TOP = "lanczos_top"
    DENSE_FULL = "dense_full"
    SHIFT_INVERT_BOTTOM = "shift_invert_bottom"


@dataclass(frozen=True)
class SolveSettings:
    """Knobs for a single eigensolve.

    ``tol`` is the residual tolerance relative to the operator's
    spectral scale: a pair certifies when ||A v - value*v|| does not
    exceed tol * max(1, |A|), with |A| taken from the operator's known
    upper bound or the largest computed eigenvalue.  For the sandwiched
    operators (norm <= 1) this coincides with an absolute tolerance.
    """

    k: int = 1
    tol: float = 1e-9
    max_iterations: int = 6000
    rng_seed: int = 74082
    mode: Mode | None = None
    shift: float = 1.0
    inner_tol: float | None = None
    inner_max_iterations: int = 50000

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class EigenPair:
    value: float
    vector: StateVector
    residual: float


@dataclass(frozen=True)
class CertReport:
    norms_ok: bool
    residuals_ok: bool
    orthogonality_ok: bool
    max_norm_deviation: float
    max_residual: float
    max_gram_offdiagonal: float

    @property
    def passed(self) -> bool:
        return self.norms_ok and self.residuals_ok and self.orthogonality_ok


class NoConvergenceError(RuntimeError):
    """Iteration budget exhausted before all requested pairs certified."""

    def __init__(self, message: str, best_residuals=()):
        super().__init__(message)
        self.best_residuals = tuple(float(r) for r in best_residuals)


class InnerSolveStallError(RuntimeError):
    """Inner conjugate-gradient solve hit its iteration cap."""

    def __init__(self, achieved_residual: float, iterations: int):
        super().__init__(
            f"inner CG stalled at relative residual {achieved_residual:.3e} "
            f"after {iterations} iterations"
        )
        self.achieved_residual = achieved_residual
        self.iterations = iterations


# ---------------------------------------------------------------------------
# Lanczos core (full reorthogonalization, deflated restarts)
# ---------------------------------------------------------------------------

def _vdot(a: np.ndarray, b: np.ndarray) -> complex:
    return complex(np.vdot(a.ravel(), b.ravel()))


def _norm2(a: np.ndarray) -> float:
    return float(np.linalg.norm(a.ravel()))


def _orthogonalize(w: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    for _ in range(2):  # two sweeps of classical Gram-Schmidt
        for q in basis:
            w = w - _vdot(q, w) * q
    return w


def _random_start(shape, rng: np.random.Generator, against: list[np.ndarray]) -> np.ndarray:
    for _ in range(20):
        v = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        v = _orthogonalize(v, against)
        nv = _norm2(v)
        if nv > 1e-8:
            return v / nv
    raise NoConvergenceError("could not generate a start vector outside the locked span")


def _lanczos_extreme(apply_values, shape, size, k, settings: SolveSettings, which: str,
                     certify_apply=None, lock_tol: float | None = None):
    """Return (values, vectors) of the k extreme eigenpairs of a Hermitian
    operator given by ``apply_values`` on arrays of the given shape.

    ``which`` is 'largest' or 'smallest'.  ``certify_apply`` defaults to
    ``apply_values`` and is the map residuals are certified against;
    ``lock_tol`` is the absolute residual threshold for locking a pair.
    """
    certify_apply = certify_apply or apply_values
    rng = np.random.default_rng(settings.rng_seed)
    tol = settings.tol if lock_tol is None else lock_tol
    locked_vals: list[float] = []
    locked_vecs: list[np.ndarray] = []
    steps = 0
    cycle_dim = min(size, max(4 * k + 40, 80))
    best_residuals: list[float] = []
    pending_start: np.ndarray | None = None

    while len(locked_vals) < k:
        if steps >= settings.max_iterations:
            raise NoConvergenceError(
                f"no convergence after {steps} Lanczos steps "
                f"({len(locked_vals)}/{k} pairs certified)",
                best_residuals=best_residuals,
            )
        if pending_start is not None:
            q = _orthogonalize(pending_start, locked_vecs)
            nq = _norm2(q)
            q = q / nq if nq > 1e-8 else _random_start(shape, rng, locked_vecs)
            pending_start = None
        else:
            q = _random_start(shape, rng, locked_vecs)
        basis: list[np.ndarray] = [q]
        alphas: list[float] = []
        betas: list[float] = []
        q_prev = None
        beta_prev = 0.0
        for _ in range(min(cycle_dim, settings.max_iterations - steps)):
            w = apply_values(basis[-1])
            steps += 1
            if locked_vecs:
                w = _orthogonalize(w, locked_vecs)
            alpha = float(np.real(_vdot(basis[-1], w)))
            alphas.append(alpha)
            w = w - alpha * basis[-1]
            if q_prev is not None:
                w = w - beta_prev * q_prev
            w = _orthogonalize(w, basis)
            beta = _norm2(w)
            scale = max(1.0, max(abs(a) for a in alphas), max(betas, default=0.0))
            if beta <= 1e-14 * scale:
                break  # invariant subspace exhausted; restart handles the rest
            betas.append(beta)
            q_prev = basis[-1]
            beta_prev = beta
            basis.append(w / beta)

        m = len(alphas)
        if m == 0:
            continue
        theta, s_mat = sla.eigh_tridiagonal(np.array(alphas), np.array(betas[: m - 1]))
        order = np.argsort(theta)[::-1] if which == "largest" else np.argsort(theta)
        q_array = np.stack(basis[:m], axis=0)

        # Lock converged Ritz pairs in strict extremal order: stopping at the
        # first unconverged candidate keeps the locked set a prefix of the
        # extreme spectrum (up to exact duplicates, which deflation absorbs).
        best_residuals = []
        for idx in order[: k - len(locked_vals) + 1]:
            y = np.tensordot(s_mat[:, idx], q_array, axes=(0, 0))
            ny = _norm2(y)
            if ny <= 1e-12:
                continue
            y = y / ny
            r = _norm2(certify_apply(y) - theta[idx] * y)
            best_residuals.append(r)
            if r > tol:
                pending_start = y
                break
            y = _orthogonalize(y, locked_vecs)
            ny = _norm2(y)
            if ny <= 1e-8:
                continue  # numerically inside the locked span already
            locked_vecs.append(y / ny)
            locked_vals.append(float(theta[idx]))
            if len(locked_vals) == k:
                break
        if len(locked_vals) < k:
            cycle_dim = min(size, int(np.ceil(cycle_dim * 1.5)))

    # Rayleigh-Ritz polish over the locked span: orthonormal basis, small
    # projected matrix, rotate.  Fixes ordering and orthogonality at once.
    v_mat = np.stack([v.ravel() for v in locked_vecs], axis=1)
    v_mat, _ = np.linalg.qr(v_mat)
    a_cols = np.stack(
        [certify_apply(v_mat[:, j].reshape(shape)).ravel() for j in range(v_mat.shape[1])],
        axis=1,
    )
    small = v_mat.conj().T @ a_cols
    small = 0.5 * (small + small.conj().T)
    vals, rot = np.linalg.eigh(small)
    if which == "largest":
        sel = np.argsort(vals)[::-1][:k]
    else:
        sel = np.argsort(vals)[:k]
    vectors = (v_mat @ rot)[:, sel]
    values = vals[sel]
    residuals = [
        _norm2(certify_apply(vectors[:, j].reshape(shape)).ravel() - values[j] * vectors[:, j])
        for j in range(k)
    ]
    return values, [vectors[:, j].reshape(shape) for j in range(k)], residuals


# ---------------------------------------------------------------------------
# Dense reference path
# ---------------------------------------------------------------------------

def materialize_dense(op: HermitianOperator) -> np.ndarray:
    """Apply the operator to every basis vector; only for small grids."""
    n = op.grid.size
    if n > DENSE_SIZE_LIMIT:
        raise ValueError(
            f"dense materialization permitted only up to {DENSE_SIZE_LIMIT} unknowns, got {n}"
        )
    shape = op.grid.shape
    cols = np.empty((n, n), dtype=np.complex128)
    basis = np.zeros(n, dtype=np.complex128)
    for j in range(n):
        basis[j] = 1.0
        cols[:, j] = op.apply_values(basis.reshape(shape)).ravel()
        basis[j] = 0.0
    return 0.5 * (cols + cols.conj().T)


def _dense_extreme(op: HermitianOperator, k: int, which: str):
    mat = materialize_dense(op)
    n = mat.shape[0]
    if k > n:
        raise ValueError(f"requested {k} pairs from a {n}-dimensional operator")
    if which == "largest":
        lo, hi = n - k, n - 1
    else:
        lo, hi = 0, k - 1
    vals, vecs = sla.eigh(mat, subset_by_index=[lo, hi])
    if which == "largest":
        vals = vals[::-1]
        vecs = vecs[:, ::-1]
    shape = op.grid.shape
    residuals = [
        _norm2(op.apply_values(vecs[:, j].reshape(shape)).ravel() - vals[j] * vecs[:, j])
        for j in range(k)
    ]
    return vals, [vecs[:, j].reshape(shape) for j in range(k)], residuals


# ---------------------------------------------------------------------------
# Shift-invert machinery
# ---------------------------------------------------------------------------

_CG_TOL_KWARG = "rtol" if "rtol" in inspect.signature(cg).parameters else "tol"


def _make_inverse_apply(op: HermitianOperator, settings: SolveSettings):
    shift = settings.shift
    n = op.grid.size
    shape = op.grid.shape

    def shifted_matvec(x: np.ndarray) -> np.ndarray:
        arr = x.reshape(shape)
        return (op.apply_values(arr) + shift * arr).ravel()

    a_op = LinearOperator((n, n), matvec=shifted_matvec, dtype=np.complex128)

    m_op = None
    if op.multiplier_part is not None:
        # Frequency-diagonal preconditioner: exact inverse of the stiff
        # multiplier part plus the mean of the potential.
        from .grid import to_frequency_values, to_position_values

        q_mean = float(np.mean(op.potential_part)) if op.potential_part is not None else 0.0
        diag = op.multiplier_part + shift + q_mean
        diag = np.maximum(diag, 1e-8 * np.max(np.abs(diag)))

        def precond(x: np.ndarray) -> np.ndarray:
            arr = x.reshape(shape)
            return to_position_values(
                op.grid, to_frequency_values(op.grid, arr) / diag
            ).ravel()

        m_op = LinearOperator((n, n), matvec=precond, dtype=np.complex128)

    inner_tol = settings.inner_tol
    if inner_tol is None:
        inner_tol = max(1e-13, settings.tol * 1e-4)

    def inverse_apply(values: np.ndarray) -> np.ndarray:
        rhs = values.ravel()
        kwargs = {_CG_TOL_KWARG: inner_tol, "atol": 0.0, "maxiter": settings.inner_max_iterations}
        x, info = cg(a_op, rhs, M=m_op, **kwargs)
        if info != 0:
            achieved = _norm2(shifted_matvec(x) - rhs) / max(_norm2(rhs), 1e-300)
            raise InnerSolveStallError(achieved, settings.inner_max_iterations)
        return x.reshape(shape)

    return inverse_apply


# ---------------------------------------------------------------------------
# Public solves
# ---------------------------------------------------------------------------

def _as_pairs(op: HermitianOperator, values, vectors, residuals) -> list[EigenPair]:
    weight = np.sqrt(op.grid.cell_volume)
    pairs = []
    for val, vec, res in zip(values, vectors, residuals):
        pairs.append(
            EigenPair(
                value=float(val),
                vector=StateVector(op.grid, vec / weight),
                residual=float(res),
            )
        )
    return pairs


def _operator_scale(op: HermitianOperator, values=()) -> float:
    scale = 1.0
    if op.upper_bound is not None:
        scale = max(scale, abs(op.upper_bound))
    for v in values:
        scale = max(scale, abs(float(v)))
    return scale


def largest_eigenpairs(op: HermitianOperator, settings: SolveSettings) -> list[EigenPair]:
    """The k largest eigenpairs, descending, pairwise orthogonal.

    Default mode is restarted Lanczos with full reorthogonalization;
    ``DENSE_FULL`` is available as an oracle on small grids.  Raises
    :class:`NoConvergenceError` when the iteration budget runs out.
    """
    mode = settings.mode or Mode.LANCZOS_TOP
    if mode is Mode.SHIFT_INVERT_BOTTOM:
        raise ValueError("shift-invert targets the smallest pairs; use smallest_eigenpairs")
    threshold = settings.tol * _operator_scale(op)
    if mode is Mode.DENSE_FULL:
        values, vectors, residuals = _dense_extreme(op, settings.k, "largest")
    else:
        limit = max(1, int(MAX_SUBSPACE_FRACTION * op.grid.size))
        if settings.k > limit:
            raise ValueError(
                f"k={settings.k} exceeds {limit} (quarter of the grid dimension)"
            )
        values, vectors, residuals = _lanczos_extreme(
            op.apply_values, op.grid.shape, op.grid.size, settings.k, settings, "largest",
            lock_tol=threshold,
        )
    if any(r > threshold for r in residuals):
        raise NoConvergenceError(
            "certified residuals exceed the requested tolerance",
            best_residuals=residuals,
        )
    return _as_pairs(op, values, vectors, residuals)


def smallest_eigenpairs(op: HermitianOperator, settings: SolveSettings) -> list[EigenPair]:
    """The k smallest eigenpairs, ascending, for positive model-type
    operators.

    ``DENSE_FULL`` (default up to 4096 unknowns) materializes the
    operator; ``SHIFT_INVERT_BOTTOM`` runs Lanczos on (A + shift)^-1 with
    inner CG solves and certifies residuals against the original
    operator.
    """
    mode = settings.mode
    if mode is None:
        mode = Mode.DENSE_FULL if op.grid.size <= DENSE_SIZE_LIMIT else Mode.SHIFT_INVERT_BOTTOM
    if mode is Mode.LANCZOS_TOP:
        raise ValueError("plain Lanczos targets the largest pairs; use largest_eigenpairs")

    if mode is Mode.DENSE_FULL:
        values, vectors, residuals = _dense_extreme(op, settings.k, "smallest")
    else:
        inverse_apply = _make_inverse_apply(op, settings)
        inv_values, vectors, _ = _lanczos_extreme(
            inverse_apply,
            op.grid.shape,
            op.grid.size,
            settings.k,
            settings,
            "largest",
            certify_apply=inverse_apply,
            lock_tol=0.1 * settings.tol,  # inverse has norm <= 1/shift
        )
        # Map back and certify against the original operator.
        values = []
        residuals = []
        for theta, vec in zip(inv_values, vectors):
            mu = 1.0 / theta - settings.shift
            r = _norm2(op.apply_values(vec) - mu * vec)
            values.append(mu)
            residuals.append(r)
        order = np.argsort(values)
        values = [values[i] for i in order]
        vectors = [vectors[i] for i in order]
        residuals = [residuals[i] for i in order]
    threshold = settings.tol * _operator_scale(op, values)
    if any(r > threshold for r in residuals):
        raise NoConvergenceError(
            "certified residuals exceed the requested tolerance",
            best_residuals=residuals,
        )
    return _as_pairs(op, values, vectors, residuals)


def certify(op: HermitianOperator, pairs: list[EigenPair], tol: float) -> CertReport:
    """Recompute norms, residuals and pairwise orthogonality from scratch.

    ``tol`` has the same scale-relative meaning as in
    :class:`SolveSettings`, so pairs returned by a solve at a given
    tolerance certify at that tolerance.
    """
    from .grid import inner as weighted_inner, norm as weighted_norm

    norm_dev = 0.0
    max_res = 0.0
    for pair in pairs:
        norm_dev = max(norm_dev, abs(weighted_norm(pair.vector) - 1.0))
        applied = op.apply(pair.vector)
        res_vec = applied.values - pair.value * pair.vector.values
        max_res = max(
            max_res, float(np.sqrt(op.grid.cell_volume) * np.linalg.norm(res_vec.ravel()))
        )
    gram_off = 0.0
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            gram_off = max(gram_off, abs(weighted_inner(pairs[i].vector, pairs[j].vector)))
    threshold = tol * _operator_scale(op, [p.value for p in pairs])
    return CertReport(
        norms_ok=norm_dev <= 1e-10,
        residuals_ok=max_res <= threshold,
        orthogonality_ok=gram_off <= 1e-8,
        max_norm_deviation=norm_dev,
        max_residual=max_res,
        max_gram_offdiagonal=gram_off,
    )


def cluster_eigenvalues(values, tol: float, factor: float = 1e3) -> list[list[int]]:
    """Group indices of eigenvalues that agree within factor*tol.

    Degenerate levels (guaranteed by symmetry in d >= 2) are only defined
    up to rotation inside a cluster, so comparisons should use cluster
    sums or traces, not individual vectors.
    """
    clusters: list[list[int]] = []
    for i, val in enumerate(values):
        if clusters and abs(val - values[clusters[-1][-1]]) <= factor * tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters

"""Periodized uniform grids, the unitary discrete Fourier transform and
discrete L^2 geometry.

The box [-L, L]^d carries N uniform nodes per axis, x_j = -L + j*h with
h = 2L/N.  Its dual lattice holds the frequencies xi_k = (pi/L) * k for
k in {-N/2, ..., N/2 - 1}, stored in FFT order so that symbol sampling
always happens at signed coordinates.  The transform pair is normalized
like the continuum transform with the (2*pi)^(-d/2) factor, so it is
unitary between the h^d-weighted position inner product and the
(pi/L)^d-weighted frequency inner product, and sampled exp(-x^2/2) maps
to sampled exp(-xi^2/2) up to grid truncation.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

__all__ = [
    "GridError",
    "Grid",
    "StateVector",
    "GridSuggestion",
    "build_grid",
    "state",
    "random_state",
    "to_frequency",
    "to_position",
    "inner",
    "inner_freq",
    "norm",
    "norm_freq",
    "save_state",
    "load_state",
    "suggest_grid",
    "DEFAULT_NODE_BUDGET",
]

DEFAULT_NODE_BUDGET = 2**22


class GridError(ValueError):
    """Invalid grid construction or mismatched grids."""


@dataclass(frozen=True)
class Grid:
    dimension: int
    n_per_axis: int
    half_length: float

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.n_per_axis

    @property
    def freq_spacing(self) -> float:
        return np.pi / self.half_length

    @property
    def size(self) -> int:
        return self.n_per_axis**self.dimension

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_per_axis,) * self.dimension

    @property
    def max_frequency(self) -> float:
        return np.pi * self.n_per_axis / (2.0 * self.half_length)

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dimension

    @property
    def freq_cell_volume(self) -> float:
        return self.freq_spacing**self.dimension

    @cached_property
    def node_axis(self) -> np.ndarray:
        return -self.half_length + self.spacing * np.arange(self.n_per_axis)

    @cached_property
    def freq_axis(self) -> np.ndarray:
        """Signed frequencies (pi/L)*k in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_per_axis, d=self.spacing)

    @cached_property
    def position_points(self) -> np.ndarray:
        """All nodes, shape (N,)*d + (d,)."""
        mesh = np.meshgrid(*([self.node_axis] * self.dimension), indexing="ij")
        return np.stack(mesh, axis=-1)

    @cached_property
    def frequency_points(self) -> np.ndarray:
        mesh = np.meshgrid(*([self.freq_axis] * self.dimension), indexing="ij")
        return np.stack(mesh, axis=-1)

    @cached_property
    def position_radii(self) -> np.ndarray:
        return np.sqrt(np.sum(np.square(self.position_points), axis=-1))

    @cached_property
    def frequency_radii(self) -> np.ndarray:
        return np.sqrt(np.sum(np.square(self.frequency_points), axis=-1))

    @cached_property
    def _phase(self) -> np.ndarray:
        # (-1)^(j_1 + ... + j_d); turns the FFT into the transform centered
        # at x = -L (nodes) with signed frequencies.
        axis_phase = (-1.0) ** np.arange(self.n_per_axis)
        out = np.ones(())
        for axis in range(self.dimension):
            shape = [1] * self.dimension
            shape[axis] = self.n_per_axis
            out = out * axis_phase.reshape(shape)
        return out

    def describe(self) -> str:
        return (
            f"d={self.dimension} N={self.n_per_axis} L={self.half_length:g} "
            f"h={self.spacing:g} xi_max={self.max_frequency:g}"
        )


def build_grid(
    d: int, N: int, L: float, max_nodes: int = DEFAULT_NODE_BUDGET
) -> Grid:
    """Construct a periodized grid; N must be even and at least 8."""
    if d < 1:
        raise GridError("dimension must be a positive integer")
    if N % 2 != 0:
        raise GridError(f"n_per_axis must be even, got {N}")
    if N < 8:
        raise GridError(f"n_per_axis must be at least 8, got {N}")
    if L <= 0:
        raise GridError("half_length must be positive")
    if N**d > max_nodes:
        raise GridError(
            f"grid with {N}^{d} nodes exceeds the node budget {max_nodes}"
        )
    return Grid(dimension=d, n_per_axis=N, half_length=float(L))


@dataclass
class StateVector:
    """Complex-valued grid function with discrete L^2 geometry."""

    grid: Grid
    values: np.ndarray

    def copy(self) -> "StateVector":
        return StateVector(self.grid, self.values.copy())


def state(grid: Grid, values: np.ndarray) -> StateVector:
    arr = np.asarray(values, dtype=np.complex128)
    if arr.shape != grid.shape:
        raise GridError(f"values shape {arr.shape} does not match grid shape {grid.shape}")
    return StateVector(grid, arr)


def random_state(grid: Grid, rng: np.random.Generator) -> StateVector:
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return StateVector(grid, vals)


def _check_same_grid(u: StateVector, v: StateVector) -> None:
    if u.grid != v.grid:
        raise GridError("state vectors live on different grids")


def inner(u: StateVector, v: StateVector) -> complex:
    """h^d-weighted inner product, conjugate-linear in the second slot."""
    _check_same_grid(u, v)
    return complex(u.grid.cell_volume * np.vdot(v.values, u.values))


def inner_freq(u: StateVector, v: StateVector) -> complex:
    """(pi/L)^d-weighted inner product for frequency-side vectors."""
    _check_same_grid(u, v)
    return complex(u.grid.freq_cell_volume * np.vdot(v.values, u.values))


def norm(u: StateVector) -> float:
    return float(np.sqrt(u.grid.cell_volume) * np.linalg.norm(u.values.ravel()))


def norm_freq(u: StateVector) -> float:
    return float(np.sqrt(u.grid.freq_cell_volume) * np.linalg.norm(u.values.ravel()))


def to_frequency_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    scale = (grid.spacing / np.sqrt(2.0 * np.pi)) ** grid.dimension
    return scale * grid._phase * np.fft.fftn(values)


def to_position_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    scale = (np.sqrt(2.0 * np.pi) / grid.spacing) ** grid.dimension
    return scale * np.fft.ifftn(grid._phase * values)


def to_frequency(u: StateVector) -> StateVector:
    """Unitary transform to the frequency lattice (FFT ordering)."""
    return StateVector(u.grid, to_frequency_values(u.grid, u.values))


def to_position(u_hat: StateVector) -> StateVector:
    """Inverse of :func:`to_frequency`."""
    return StateVector(u_hat.grid, to_position_values(u_hat.grid, u_hat.values))


# ---------------------------------------------------------------------------
# Binary state dumps: magic "SGV1", then little-endian int64 d, int64 N,
# float64 L, then N^d (re, im) float64 pairs in C order.
# ---------------------------------------------------------------------------

_MAGIC = b"SGV1"
_HEADER = struct.Struct("<qqd")


def save_state(u: StateVector, path) -> None:
    interleaved = np.empty(u.grid.size * 2, dtype="<f8")
    flat = u.values.ravel()
    interleaved[0::2] = flat.real
    interleaved[1::2] = flat.imag
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(_HEADER.pack(u.grid.dimension, u.grid.n_per_axis, u.grid.half_length))
        fh.write(interleaved.tobytes())


def load_state(path) -> StateVector:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise GridError(f"not a state dump (bad magic {magic!r})")
        d, n, L = _HEADER.unpack(fh.read(_HEADER.size))
        grid = build_grid(d, n, L, max_nodes=n**d)
        raw = np.frombuffer(fh.read(), dtype="<f8")
    if raw.size != 2 * grid.size:
        raise GridError("state dump payload does not match the header")
    values = (raw[0::2] + 1j * raw[1::2]).reshape(grid.shape)
    return StateVector(grid, values)


# ---------------------------------------------------------------------------
# Heuristic grid chooser
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSuggestion:
    dimension: int
    n_per_axis: int
    half_length: float
    reasoning: tuple[str, ...]

    def build(self, max_nodes: int = DEFAULT_NODE_BUDGET) -> Grid:
        return build_grid(self.dimension, self.n_per_axis, self.half_length, max_nodes)


def suggest_grid(
    pair,
    k: int = 1,
    alphas: Sequence[float] | None = None,
    margin_factor: float = 50.0,
    max_nodes: int = DEFAULT_NODE_BUDGET,
) -> GridSuggestion:
    """Pick a box size and resolution for the scaled-operator family.

    After the scaling reduction the eigenfunctions of interest live on
    O(1) scales, so one grid serves a whole alpha ladder.  The box is
    sized so the principal potential wall 2*A0*V0*Phi reaches
    ``margin_factor`` times a coarse estimate of the k-th model
    eigenvalue, and the resolution so the principal multiplier
    V0^2*Psi does the same at the top lattice frequency; when an alpha
    ladder is supplied the symbol itself must also have decayed below
    1e-8 of its peak at the top frequency for the smallest alpha.
    """
    from .operators import build_model_operator  # local import: cycle avoidance
    from .eigensolve import Mode, SolveSettings, smallest_eigenpairs

    d = pair.dimension
    reasoning: list[str] = []

    # Coarse model-eigenvalue scale from a small dense solve.
    n_coarse = {1: 128, 2: 32}.get(d, 16)
    coarse = build_grid(d, n_coarse, 10.0, max_nodes=max_nodes)
    pairs = smallest_eigenpairs(
        build_model_operator(pair, coarse),
        SolveSettings(k=k, tol=1e-6, mode=Mode.DENSE_FULL, rng_seed=0),
    )
    mu_scale = max(pairs[-1].value, 1e-6)
    reasoning.append(
        f"coarse dense solve on {coarse.describe()} puts the target eigenvalue scale at {mu_scale:.3g}"
    )
    target = margin_factor * mu_scale

    dirs_min_phi = _min_on_sphere(pair.v_profile)
    dirs_min_psi = _min_on_sphere(pair.a_profile)
    a0 = pair.a_profile.max_value
    v0 = pair.v_profile.max_value

    # Potential wall 2*A0*V0*Phi(L) >= target.
    L = (target / (2.0 * a0 * v0 * dirs_min_phi)) ** (1.0 / pair.v_profile.degree)
    L = max(8.0, float(np.ceil(1.25 * L)))
    reasoning.append(
        f"half_length {L:g} makes the position wall reach {margin_factor:g}x the eigenvalue scale"
    )

    # Multiplier wall V0^2*Psi(xi_max) >= target.
    xi_max = (target / (v0**2 * dirs_min_psi)) ** (1.0 / pair.a_profile.degree)

    if alphas:
        # Scaled symbol must be decayed at the top frequency for the
        # smallest alpha: a(alpha^(beta/(beta+gamma)) * xi_max) <= 1e-8 * A0.
        gamma = pair.a_profile.degree
        beta = pair.v_profile.degree
        s = min(alphas) ** (beta / (beta + gamma))
        xi = xi_max
        probe_dirs = np.eye(d)[:1]
        for _ in range(200):
            val = float(np.max(pair.a_profile.evaluate(s * xi * probe_dirs)))
            if val <= 1e-8 * a0:
                break
            xi *= 1.25
        if xi > xi_max:
            reasoning.append(
                f"raised the frequency cutoff to {xi:.3g} so the scaled symbol decays below 1e-8"
            )
        xi_max = xi

    n = 2 ** int(np.ceil(np.log2(max(16.0, 2.0 * L * xi_max / np.pi))))
    while n**d > max_nodes and n > 16:
        n //= 2
        reasoning.append(f"halved the resolution to {n} per axis to respect the node budget")
    reasoning.append(
        f"{n} nodes per axis put the top lattice frequency at {np.pi * n / (2 * L):.3g}"
    )
    return GridSuggestion(dimension=d, n_per_axis=n, half_length=L, reasoning=tuple(reasoning))


def _min_on_sphere(profile) -> float:
    from .profiles import _sphere_directions

    dirs = _sphere_directions(profile.dimension, 64, seed=3)
    vals = np.asarray(profile.principal(dirs), dtype=float)
    vals = vals[np.isfinite(vals) & (vals > 0)]
    return float(vals.min()) if vals.size else 1.0

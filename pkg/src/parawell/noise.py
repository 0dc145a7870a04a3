"""Additive Wiener noise: sampling, coarse aggregation and injection.

Two noise models are supported:

* :class:`StandardBM` -- one scalar Brownian motion added uniformly to every
  node (the 1D TM experiment).
* :class:`TraceClassSeries` -- a truncated Q-Wiener expansion with modes
  ``sqrt(2/a) sin(n pi x / a)`` and eigenvalues ``n**-(2r + 1 + delta)``.
  The modes depend on ``x`` only, so in 2D they are constant along ``y``.

A :class:`WienerPath` always carries a leading sample axis; its fine
increments have shape ``(samples, N, J, channels)``. Every stored increment
is N(0, dt). The coarse increment of subinterval ``n`` is the left-to-right
sum of its ``J`` fine increments, so coarse and fine solvers consume exactly
the same Brownian path.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.special

from .errors import ConfigError, NoiseShapeError
from .grid import FieldState, Grid


@dataclass(frozen=True)
class StandardBM:
    pass


@dataclass(frozen=True)
class TraceClassSeries:
    a: float = 2.0
    r: float = 0.5
    delta: float = 0.001
    n_modes: int = 100

    def __post_init__(self):
        if not self.delta > 0:
            raise ConfigError("noise.delta", "must be > 0 for a trace-class covariance")
        if not self.r >= 0:
            raise ConfigError("noise.r", "must be >= 0")
        if not self.a > 0:
            raise ConfigError("noise.a", "must be > 0")
        if self.n_modes < 1:
            raise ConfigError("noise.n_modes", "must be >= 1")

    @property
    def exponent(self) -> float:
        return 2 * self.r + 1 + self.delta

    def eigenvalues(self) -> np.ndarray:
        n = np.arange(1, self.n_modes + 1, dtype=float)
        return n ** -self.exponent

    def truncated_trace(self) -> float:
        return float(np.sum(self.eigenvalues()))

    def full_trace(self) -> float:
        return float(scipy.special.zeta(self.exponent, 1))

    def trace_remainder(self) -> float:
        """Part of Tr(Q) dropped by the truncation."""
        return self.full_trace() - self.truncated_trace()

    def modes(self, x: np.ndarray) -> np.ndarray:
        """Scaled mode values ``sqrt(lambda_n) e_n(x)``, shape (n_modes, len(x))."""
        n = np.arange(1, self.n_modes + 1, dtype=float)[:, None]
        return np.sqrt(2.0 / self.a) * n ** (-self.exponent / 2) * np.sin(n * np.pi * x / self.a)


@dataclass(frozen=True)
class NoiseSpec:
    kind: StandardBM | TraceClassSeries = field(default_factory=StandardBM)
    lambda_e: float = 1.0
    lambda_h: float = 1.0
    shared_w: bool = True

    @property
    def silent(self) -> bool:
        return self.lambda_e == 0 and self.lambda_h == 0

    @property
    def modes_per_equation(self) -> int:
        return 1 if isinstance(self.kind, StandardBM) else self.kind.n_modes

    @property
    def channels(self) -> int:
        """Independent Brownian motions per path."""
        m = self.modes_per_equation
        return m if self.shared_w else 2 * m

    def trace(self) -> float:
        return 1.0 if isinstance(self.kind, StandardBM) else self.kind.truncated_trace()


@dataclass(frozen=True, eq=False)
class WienerPath:
    seeds: tuple[int, ...]
    n_coarse: int
    n_fine_per_coarse: int
    dt: float
    fine_increments: np.ndarray = field(repr=False)

    def __post_init__(self):
        f = self.fine_increments
        if f.ndim != 4 or f.shape[1:3] != (self.n_coarse, self.n_fine_per_coarse):
            raise NoiseShapeError(f"fine increments of shape {f.shape} do not match N, J")
        if len(self.seeds) != f.shape[0]:
            raise NoiseShapeError("one seed per sample expected")

    @property
    def n_samples(self) -> int:
        return self.fine_increments.shape[0]

    @property
    def channels(self) -> int:
        return self.fine_increments.shape[3]

    def fine_increment(self, n: int, j: int) -> np.ndarray:
        """Increment of fine step ``j`` (1-based) inside subinterval ``n`` (1-based)."""
        return self.fine_increments[:, n - 1, j - 1, :]

    def select(self, index) -> "WienerPath":
        idx = np.arange(self.n_samples)[index]
        idx = np.atleast_1d(idx)
        return WienerPath(
            tuple(self.seeds[i] for i in idx),
            self.n_coarse,
            self.n_fine_per_coarse,
            self.dt,
            self.fine_increments[idx],
        )

    def regroup(self, n_fine_per_coarse: int) -> "WienerPath":
        """Same fine path viewed with a different number of fine steps per subinterval."""
        total = self.n_coarse * self.n_fine_per_coarse
        if total % n_fine_per_coarse:
            raise NoiseShapeError(f"{total} fine steps cannot be grouped by {n_fine_per_coarse}")
        N = total // n_fine_per_coarse
        f = self.fine_increments.reshape(self.n_samples, N, n_fine_per_coarse, self.channels)
        return WienerPath(self.seeds, N, n_fine_per_coarse, self.dt, f)

    def coarsen(self, factor: int) -> "WienerPath":
        """Path on the mesh dt*factor whose increments are exact sums of ``factor`` steps."""
        total = self.n_coarse * self.n_fine_per_coarse
        if total % factor or self.n_fine_per_coarse % factor:
            raise NoiseShapeError(f"cannot coarsen by {factor}")
        grouped = self.fine_increments.reshape(self.n_samples, total // factor, factor, self.channels)
        summed = _left_sum(grouped, axis=2)
        J = self.n_fine_per_coarse // factor
        return WienerPath(
            self.seeds,
            self.n_coarse,
            J,
            self.dt * factor,
            summed.reshape(self.n_samples, self.n_coarse, J, self.channels),
        )


def _left_sum(a: np.ndarray, axis: int) -> np.ndarray:
    """Strict left-to-right summation along ``axis``."""
    a = np.moveaxis(a, axis, 0)
    acc = a[0].copy()
    for part in a[1:]:
        acc = acc + part
    return acc


def sample_seed(master_seed: int, index: int) -> int:
    """64-bit per-sample seed derived from (master seed, sample index)."""
    ss = np.random.SeedSequence([int(master_seed) & (2**64 - 1), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _draw(spec: NoiseSpec, seed: int, N: int, J: int, dt: float) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((N * J, spec.channels))
    return (np.sqrt(dt) * z).reshape(N, J, spec.channels)


def sample_path(spec: NoiseSpec, seed: int, N: int, J: int, dt: float) -> WienerPath:
    """One Brownian path on ``N*J`` fine steps of size ``dt``.

    The fine increments depend on ``(spec, seed, N*J, dt)`` only, so
    regrouping the same total number of fine steps into different (N, J)
    splits reuses the identical path.
    """
    if N < 1 or J < 1:
        raise ConfigError("N/J", "must be >= 1")
    if not dt > 0:
        raise ConfigError("dt", "must be > 0")
    return WienerPath((int(seed),), N, J, float(dt), _draw(spec, seed, N, J, dt)[None])


def sample_paths(
    spec: NoiseSpec, master_seed: int, indices: Sequence[int], N: int, J: int, dt: float
) -> WienerPath:
    """Batch of independent paths, one per Monte Carlo sample index."""
    seeds = tuple(sample_seed(master_seed, i) for i in indices)
    fine = np.stack([_draw(spec, s, N, J, dt) for s in seeds]) if seeds else np.zeros((0, N, J, spec.channels))
    return WienerPath(seeds, N, J, float(dt), fine)


def coarse_increment(path: WienerPath, n: int) -> np.ndarray:
    """Sum of the J fine increments of subinterval ``n`` (1-based), left to right."""
    if not 1 <= n <= path.n_coarse:
        raise IndexError(f"subinterval {n} outside 1..{path.n_coarse}")
    return _left_sum(path.fine_increments[:, n - 1], axis=1)


def noise_matrix(spec: NoiseSpec, grid: Grid) -> np.ndarray:
    """Matrix B with ``B.T @ increment`` = injected field, shape (channels, n_dof)."""
    p = grid.n_points
    n_h = len(grid.components) - 1
    if isinstance(spec.kind, StandardBM):
        profile = np.ones((1, p))
    else:
        phi = spec.kind.modes(grid.x_nodes())
        if grid.dimension == 2:
            phi = np.repeat(phi, grid.ny, axis=1)
        profile = phi
    m = profile.shape[0]
    B = np.zeros((spec.channels, grid.n_dof))
    e_rows = slice(0, m)
    h_rows = slice(0, m) if spec.shared_w else slice(m, 2 * m)
    B[e_rows, :p] = spec.lambda_e * profile
    for c in range(n_h):
        B[h_rows, (1 + c) * p:(2 + c) * p] = spec.lambda_h * profile
    return B


def inject_noise(spec: NoiseSpec, grid: Grid, increment, B: np.ndarray | None = None) -> FieldState:
    """Field B dW for an increment of shape ``(..., channels)``.

    A scalar is accepted for a shared standard Brownian motion. ``B`` may be
    passed in to reuse a precomputed :func:`noise_matrix`.
    """
    inc = np.asarray(increment, dtype=float)
    if inc.ndim == 0:
        inc = inc[None]
    if inc.shape[-1] != spec.channels:
        raise NoiseShapeError(f"increment has {inc.shape[-1]} channels, spec expects {spec.channels}")
    if spec.silent:
        return FieldState(grid, np.zeros((*inc.shape[:-1], grid.n_dof)))
    if B is None:
        B = noise_matrix(spec, grid)
    return FieldState(grid, inc @ B)


_MAGIC = b"PWWP"
_HEADER = struct.Struct("<4sHBBIIIId")
_KIND_CODES = {StandardBM: 0, TraceClassSeries: 1}


def dump_path(path: WienerPath, spec: NoiseSpec, file) -> None:
    """Binary dump: header, per-sample seeds (u64), increments (little-endian f64)."""
    f = path.fine_increments
    header = _HEADER.pack(
        _MAGIC, 1, _KIND_CODES[type(spec.kind)], int(spec.shared_w),
        f.shape[0], path.n_coarse, path.n_fine_per_coarse, f.shape[3], path.dt,
    )
    with open(file, "wb") as fh:
        fh.write(header)
        fh.write(np.asarray(path.seeds, dtype="<u8").tobytes())
        fh.write(np.ascontiguousarray(f, dtype="<f8").tobytes())


def load_path(file) -> WienerPath:
    with open(file, "rb") as fh:
        raw = fh.read()
    magic, version, _kind, _shared, S, N, J, C, dt = _HEADER.unpack_from(raw)
    if magic != _MAGIC or version != 1:
        raise NoiseShapeError("not a parawell path file")
    off = _HEADER.size
    seeds = np.frombuffer(raw, dtype="<u8", count=S, offset=off)
    off += 8 * S
    body = np.frombuffer(raw, dtype="<f8", count=S * N * J * C, offset=off)
    return WienerPath(tuple(int(s) for s in seeds), N, J, dt, body.reshape(S, N, J, C).astype(float))

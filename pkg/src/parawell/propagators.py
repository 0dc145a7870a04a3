"""Stochastic exponential scheme used as coarse and fine propagator.

One step of size ``dt`` maps ``u`` to ``S(dt) [u + F(t, u) dt + B dW]`` with
``S(dt) = exp(dt (M - sigma I))``. Factoring the semigroup out of the three
terms means a single exponential action per step.

The coarse propagator takes one step of size ``dT`` fed with the aggregated
increment of the subinterval; the fine propagator takes ``J`` steps of size
``dt = dT / J`` fed with the stored fine increments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import DomainError, GridMismatch, MeshError, NoiseShapeError
from .grid import FieldState, Grid, weighted_norm_sq_values
from .noise import NoiseSpec, WienerPath, coarse_increment, noise_matrix
from .operator import MaxwellOperator


class ZeroDrift:
    lipschitz = 0.0
    is_zero = True

    def evaluate(self, t, values):
        return np.zeros_like(values)

    def __call__(self, t, u: FieldState) -> FieldState:
        return FieldState(u.grid, self.evaluate(t, u.values))

    def __repr__(self):
        return "ZeroDrift()"


@dataclass(frozen=True)
class AffineDrift:
    """F(t, u) = -rate * u + offset, applied pointwise to every unknown.

    Only meant to exercise the drift term of the scheme in tests.
    """

    rate: float = 1.0
    offset: float = 0.0
    is_zero = False

    @property
    def lipschitz(self) -> float:
        return abs(self.rate)

    def evaluate(self, t, values):
        return -self.rate * values + self.offset

    def __call__(self, t, u: FieldState) -> FieldState:
        return FieldState(u.grid, self.evaluate(t, u.values))


def check_lipschitz(drift, grid: Grid, probes: int = 16, seed: int = 0) -> float:
    """Largest observed ||F(u) - F(v)|| / ||u - v|| over random probe pairs.

    Raises DomainError if it exceeds the drift's declared constant.
    """
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((probes, grid.n_dof))
    v = rng.standard_normal((probes, grid.n_dof))
    t = rng.uniform(0, 1, probes)
    num = np.array([weighted_norm_sq_values(grid, drift.evaluate(t[i], u[i]) - drift.evaluate(t[i], v[i]))
                    for i in range(probes)])
    den = weighted_norm_sq_values(grid, u - v)
    ratio = float(np.sqrt(np.max(num / den)))
    if ratio > drift.lipschitz * (1 + 1e-12) + 1e-300:
        raise DomainError(f"drift violates its Lipschitz bound: {ratio} > {drift.lipschitz}")
    return ratio


@dataclass(frozen=True, eq=False)
class PropagatorConfig:
    operator: MaxwellOperator
    noise: NoiseSpec
    dt: float
    drift: object = field(default_factory=ZeroDrift)
    _B: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError(f"step size must be > 0, got {self.dt}")
        if isinstance(self.drift, AffineDrift):
            check_lipschitz(self.drift, self.operator.grid)
        object.__setattr__(self, "_B", noise_matrix(self.noise, self.operator.grid))

    @property
    def grid(self) -> Grid:
        return self.operator.grid

    def step_values(self, t: float, values: np.ndarray, dW: np.ndarray) -> np.ndarray:
        """Array-level exponential step; ``values`` is (..., n_dof), ``dW`` (..., channels)."""
        rhs = values
        if not self.drift.is_zero:
            rhs = rhs + self.dt * self.drift.evaluate(t, values)
        if not self.noise.silent:
            dW = np.asarray(dW, dtype=float)
            if dW.shape[-1] != self._B.shape[0]:
                raise NoiseShapeError(f"increment has {dW.shape[-1]} channels, expected {self._B.shape[0]}")
            rhs = rhs + dW @ self._B
        return self.operator.propagate(self.dt, rhs)


@dataclass(eq=False)
class Trajectory:
    grid: Grid
    values: np.ndarray = field(repr=False)  # (N + 1, samples, n_dof)
    provenance: str = "Reference"

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, n) -> FieldState:
        return FieldState(self.grid, self.values[n])

    def __iter__(self) -> Iterator[FieldState]:
        return (self[n] for n in range(len(self)))

    @property
    def states(self) -> list[FieldState]:
        return list(self)


def exponential_step(cfg: PropagatorConfig, t_n: float, u: FieldState, dW) -> FieldState:
    if u.grid != cfg.grid:
        raise GridMismatch("state and propagator live on different grids")
    return FieldState(cfg.grid, cfg.step_values(t_n, u.values, dW))


def _check_coarse(cfg, path):
    expected = path.dt * path.n_fine_per_coarse
    if not math.isclose(cfg.dt, expected, rel_tol=1e-12):
        raise MeshError(f"coarse step {cfg.dt} != J * dt = {expected}")


def _check_fine(cfg, path):
    if not math.isclose(cfg.dt, path.dt, rel_tol=1e-12):
        raise MeshError(f"fine step {cfg.dt} != path step {path.dt}")


def _coarse_values(cfg, n, values, path):
    return cfg.step_values((n - 1) * cfg.dt, values, coarse_increment(path, n))


def _fine_values(cfg, n, values, path):
    J = path.n_fine_per_coarse
    for j in range(1, J + 1):
        t = ((n - 1) * J + (j - 1)) * cfg.dt
        values = cfg.step_values(t, values, path.fine_increment(n, j))
    return values


def _batched(u: FieldState, path: WienerPath) -> np.ndarray:
    vals = u.values
    if vals.ndim == 1:
        vals = np.broadcast_to(vals, (path.n_samples, vals.size)).copy()
    elif vals.shape[0] != path.n_samples:
        raise MeshError(f"{vals.shape[0]} states for {path.n_samples} noise samples")
    return vals


def coarse_step(cfg_G: PropagatorConfig, n: int, u: FieldState, path: WienerPath) -> FieldState:
    """Coarse propagator over subinterval ``n`` (1-based) with the aggregated increment."""
    _check_coarse(cfg_G, path)
    return FieldState(cfg_G.grid, _coarse_values(cfg_G, n, _batched(u, path), path))


def fine_sweep(cfg_F: PropagatorConfig, n: int, u_start: FieldState, path: WienerPath) -> FieldState:
    """J fine exponential steps across subinterval ``n`` (1-based)."""
    _check_fine(cfg_F, path)
    return FieldState(cfg_F.grid, _fine_values(cfg_F, n, _batched(u_start, path), path))


def coarse_solve(cfg_G: PropagatorConfig, u0: FieldState, path: WienerPath) -> Trajectory:
    _check_coarse(cfg_G, path)
    out = np.empty((path.n_coarse + 1, path.n_samples, cfg_G.grid.n_dof))
    out[0] = _batched(u0, path)
    for n in range(1, path.n_coarse + 1):
        out[n] = _coarse_values(cfg_G, n, out[n - 1], path)
    return Trajectory(cfg_G.grid, out, "Coarse")


def reference_solve(cfg_F: PropagatorConfig, u0: FieldState, path: WienerPath) -> Trajectory:
    """Sequential fine solution recorded at the coarse times."""
    _check_fine(cfg_F, path)
    out = np.empty((path.n_coarse + 1, path.n_samples, cfg_F.grid.n_dof))
    out[0] = _batched(u0, path)
    for n in range(1, path.n_coarse + 1):
        out[n] = _fine_values(cfg_F, n, out[n - 1], path)
    return Trajectory(cfg_F.grid, out, "Reference")

"""Uniform PEC grids, field states and the eps/mu weighted inner product.

Unknowns live on interior nodes only. On a grid with ``nx`` interior points
along ``[0, extent_x]`` the spacing is ``extent_x / (nx + 1)`` and the
boundary values of E_z (identically zero) are never stored.

A :class:`FieldState` stores its components back to back in one flat vector
(component-major, row-major within a component with ``x`` as the slow axis).
Leading axes of ``values`` are independent samples, so one state object can
carry a whole Monte Carlo batch.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError, GridMismatch

COMPONENTS = {1: ("E_z", "H_y"), 2: ("E_z", "H_x", "H_y")}


@dataclass(frozen=True)
class Grid:
    dimension: int
    nx: int
    extent_x: float
    ny: int = 0
    extent_y: float = 0.0
    epsilon: float = 1.0
    mu: float = 1.0
    boundary: str = "PEC"

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise DimensionError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.nx < 2:
            raise DomainError("nx must be >= 2")
        if self.extent_x <= 0:
            raise DomainError("extent_x must be positive")
        if self.dimension == 2:
            if self.ny < 2:
                raise DomainError("ny must be >= 2 on a 2D grid")
            if self.extent_y <= 0:
                raise DomainError("extent_y must be positive")
        if not (self.epsilon > 0 and self.mu > 0):
            raise DomainError("epsilon and mu must be positive")
        if self.boundary != "PEC":
            raise DomainError(f"unsupported boundary {self.boundary!r}")

    @classmethod
    def line(cls, nx, extent=2 * np.pi, epsilon=1.0, mu=1.0):
        return cls(1, nx, float(extent), epsilon=epsilon, mu=mu)

    @classmethod
    def square(cls, n, extent=2 * np.pi, epsilon=1.0, mu=1.0):
        return cls(2, n, float(extent), n, float(extent), epsilon=epsilon, mu=mu)

    @property
    def dx(self) -> float:
        return self.extent_x / (self.nx + 1)

    @property
    def dy(self) -> float:
        return self.extent_y / (self.ny + 1) if self.dimension == 2 else 1.0

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy if self.dimension == 2 else self.dx

    @property
    def components(self) -> tuple[str, ...]:
        return COMPONENTS[self.dimension]

    @property
    def n_points(self) -> int:
        return self.nx * self.ny if self.dimension == 2 else self.nx

    @property
    def n_dof(self) -> int:
        return len(self.components) * self.n_points

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.nx, self.ny) if self.dimension == 2 else (self.nx,)

    def x_nodes(self) -> np.ndarray:
        return self.dx * np.arange(1, self.nx + 1)

    def y_nodes(self) -> np.ndarray:
        if self.dimension != 2:
            raise DimensionError("1D grid has no y nodes")
        return self.dy * np.arange(1, self.ny + 1)

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Node coordinates broadcast to the component shape."""
        if self.dimension == 1:
            return (self.x_nodes(),)
        return tuple(np.meshgrid(self.x_nodes(), self.y_nodes(), indexing="ij"))

    def weights(self) -> np.ndarray:
        """Quadrature weight of every flat degree of freedom (eps or mu times cell area)."""
        w = np.empty(self.n_dof)
        p = self.n_points
        w[:p] = self.epsilon * self.cell_area
        w[p:] = self.mu * self.cell_area
        return w


@dataclass(frozen=True, eq=False)
class FieldState:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 0 or values.shape[-1] != self.grid.n_dof:
            raise DomainError(
                f"state length {values.shape[-1:] } does not match grid dof {self.grid.n_dof}"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("field state contains NaN or Inf")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid, batch: Sequence[int] = ()) -> "FieldState":
        return cls(grid, np.zeros((*batch, grid.n_dof)))

    @classmethod
    def from_components(cls, grid: Grid, **fields) -> "FieldState":
        """Build a state from named component arrays; missing components are zero."""
        unknown = set(fields) - set(grid.components)
        if unknown:
            raise DomainError(f"unknown components {sorted(unknown)}")
        parts = []
        for name in grid.components:
            arr = np.broadcast_to(np.asarray(fields.get(name, 0.0), dtype=float), grid.shape)
            parts.append(arr.reshape(-1))
        return cls(grid, np.concatenate(parts))

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.values.shape[:-1]

    def component(self, name: str) -> np.ndarray:
        i = self.grid.components.index(name)
        p = self.grid.n_points
        return self.values[..., i * p:(i + 1) * p].reshape(*self.batch_shape, *self.grid.shape)

    def sample(self, index) -> "FieldState":
        return FieldState(self.grid, self.values[index])

    def copy(self) -> "FieldState":
        return FieldState(self.grid, self.values.copy())

    def _check(self, other):
        if not isinstance(other, FieldState):
            return NotImplemented
        if other.grid != self.grid:
            raise GridMismatch("states live on different grids")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return FieldState(self.grid, self.values + other.values)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return FieldState(self.grid, self.values - other.values)

    def __mul__(self, c):
        return FieldState(self.grid, self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldState(self.grid, -self.values)

    def to_csv(self, path, extra_columns=None):
        """Write ``x[,y],component,value`` rows for an unbatched state."""
        if self.batch_shape:
            raise DimensionError("only a single sample can be written as a snapshot")
        extra_columns = dict(extra_columns or {})
        coords = [c.reshape(-1) for c in self.grid.mesh()]
        header = ["x", "y"][: self.grid.dimension] + ["component", "value", *extra_columns]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for name in self.grid.components:
                vals = self.component(name).reshape(-1)
                for idx in range(vals.size):
                    row = [repr(float(c[idx])) for c in coords]
                    row += [name, repr(float(vals[idx]))]
                    row += [str(v) for v in extra_columns.values()]
                    writer.writerow(row)


def weighted_inner(a: FieldState, b: FieldState):
    """Rectangle-rule approximation of int(eps E1.E2 + mu H1.H2) dx.

    Returns a float for unbatched states and an array over the batch axes
    otherwise.
    """
    if a.grid != b.grid:
        raise GridMismatch("weighted_inner of states on different grids")
    p = a.grid.n_points
    e = np.sum(a.values[..., :p] * b.values[..., :p], axis=-1)
    h = np.sum(a.values[..., p:] * b.values[..., p:], axis=-1)
    out = a.grid.cell_area * (a.grid.epsilon * e + a.grid.mu * h)
    return float(out) if np.ndim(out) == 0 else out


def weighted_norm(a: FieldState):
    return np.sqrt(np.maximum(weighted_inner(a, a), 0.0))


def weighted_norm_sq_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Squared weighted norm of raw flat vectors (no FieldState wrapping)."""
    p = grid.n_points
    e = np.sum(values[..., :p] ** 2, axis=-1)
    h = np.sum(values[..., p:] ** 2, axis=-1)
    return grid.cell_area * (grid.epsilon * e + grid.mu * h)

"""Monte Carlo parareal experiments: iteration sweeps, order studies, noise impact."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .config import ExperimentConfig
from .errors import ConfigError, DomainError
from .grid import FieldState, Grid
from .noise import NoiseSpec, StandardBM, TraceClassSeries, sample_paths
from .operator import KrylovExpmv, MaxwellOperator, assemble
from .parareal import ParaRealRun, bound_envelope, iteration_errors, parareal_solve
from .propagators import PropagatorConfig

log = logging.getLogger(__name__)


class ErrorRow(NamedTuple):
    experiment: str
    sigma: float
    lam: float
    dT: float
    k: int
    error: float
    bound: float | None
    seed: int
    samples: int


class SlopeRow(NamedTuple):
    experiment: str
    sigma: float
    lam: float
    k: int
    slope: float
    intercept: float
    residual: float


class FitResult(NamedTuple):
    slope: float
    intercept: float
    residual: float


@dataclass
class ResultTable:
    experiment: str
    errors: list[ErrorRow] = field(default_factory=list)
    slopes: list[SlopeRow] = field(default_factory=list)
    snapshots: list[tuple[float, FieldState]] = field(default_factory=list)
    roughness: dict[float, float] = field(default_factory=dict)
    timings: list[tuple[float, float, float, float]] = field(default_factory=list)

    def curve(self, sigma=None, lam=None, dT=None) -> np.ndarray:
        """error(k) for one (sigma, lambda, dT) group, ordered by k."""
        rows = [
            r for r in self.errors
            if (sigma is None or r.sigma == sigma)
            and (lam is None or r.lam == lam)
            and (dT is None or r.dT == dT)
        ]
        groups = {(r.sigma, r.lam, r.dT) for r in rows}
        if len(groups) != 1:
            raise DomainError(f"selection matches {len(groups)} groups")
        return np.array([r.error for r in sorted(rows, key=lambda r: r.k)])

    def slope(self, k, sigma=None, lam=None) -> float:
        for r in self.slopes:
            if r.k == k and (sigma is None or r.sigma == sigma) and (lam is None or r.lam == lam):
                return r.slope
        raise KeyError(k)


def build_grid(cfg: ExperimentConfig) -> Grid:
    if cfg.problem == "TM1D":
        return Grid(1, cfg.nx, cfg.extent_x, epsilon=cfg.epsilon, mu=cfg.mu)
    return Grid(2, cfg.nx, cfg.extent_x, cfg.ny, cfg.extent_y, epsilon=cfg.epsilon, mu=cfg.mu)


def initial_condition(grid: Grid) -> FieldState:
    """Plane-wave initial data of the 1D and 2D TM test problems."""
    if grid.dimension == 1:
        (x,) = grid.mesh()
        return FieldState.from_components(
            grid, E_z=np.sin(x), H_y=-np.sqrt(grid.epsilon / grid.mu) * np.sin(x)
        )
    x, y = grid.mesh()
    return FieldState.from_components(
        grid,
        E_z=np.sin(3 * np.pi * x) * np.sin(4 * np.pi * y),
        H_x=-0.8 * np.cos(3 * np.pi * x) * np.sin(4 * np.pi * y),
        H_y=-0.6 * np.sin(3 * np.pi * x) * np.sin(4 * np.pi * y),
    )


def noise_spec(cfg: ExperimentConfig, lam: float) -> NoiseSpec:
    if cfg.noise_kind == "standard_bm":
        kind = StandardBM()
    else:
        kind = TraceClassSeries(cfg.a, cfg.r, cfg.delta, cfg.n_modes)
    return NoiseSpec(kind, float(lam), float(lam), cfg.shared_w)


def build_operator(cfg: ExperimentConfig, grid: Grid, dT: float) -> MaxwellOperator:
    strategy = cfg.strategy
    if strategy == "krylov" or (strategy == "auto" and grid.n_dof > 1024):
        strategy = KrylovExpmv(cfg.krylov_m, cfg.krylov_tol)
    return assemble(grid, 0.0, strategy, cache_times=(dT, cfg.dt))


def _chunks(n: int, size: int) -> list[range]:
    return [range(i, min(i + size, n)) for i in range(0, n, size)]


def monte_carlo(
    cfg: ExperimentConfig,
    op: MaxwellOperator,
    noise: NoiseSpec,
    dT: float,
    u0: FieldState,
    sample_indices: Sequence[int] | None = None,
    keep_final: bool = False,
) -> list[ParaRealRun]:
    """Parareal runs over fixed-size chunks of Monte Carlo samples.

    Chunk boundaries depend only on ``chunk_size``, never on the number of
    threads, so results are reproducible bit for bit.
    """
    N, J = cfg.N(dT), cfg.J(dT)
    indices = list(range(cfg.mc_samples)) if sample_indices is None else list(sample_indices)
    G = PropagatorConfig(op, noise, dT)
    F = PropagatorConfig(op, noise, cfg.dt)

    def task(chunk):
        idx = [indices[i] for i in chunk]
        path = sample_paths(noise, cfg.master_seed, idx, N, J, cfg.dt)
        run = parareal_solve(G, F, u0, path, cfg.K, keep_iterates=False)
        run.reference = None
        if not keep_final:
            run.final = None
        return run

    chunks = _chunks(len(indices), cfg.chunk_size)
    if cfg.threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            return list(pool.map(task, chunks))
    return [task(c) for c in chunks]


def _error_rows(cfg, sigma, lam, dT, curve, samples):
    N = cfg.N(dT)
    rows = []
    for k, err in enumerate(curve):
        bound = bound_envelope(k, N, dT) if k < N else None
        rows.append(ErrorRow(cfg.name, float(sigma), float(lam), float(dT), k, float(err),
                             bound, cfg.master_seed, samples))
    return rows


def _sweep(cfg: ExperimentConfig, dTs) -> ResultTable:
    table = ResultTable(cfg.name)
    grid = build_grid(cfg)
    u0 = initial_condition(grid)
    for dT in dTs:
        base = build_operator(cfg, grid, dT)
        for sigma in cfg.sigma_list:
            op = base.with_sigma(sigma)
            for lam in cfg.lambda_list:
                start = time.perf_counter()
                runs = monte_carlo(cfg, op, noise_spec(cfg, lam), dT, u0)
                curve = iteration_errors(runs)
                wall = time.perf_counter() - start
                log.info("%s sigma=%g lambda=%g dT=%g: %s (%.1fs)", cfg.name, sigma, lam, dT,
                         np.array2string(curve, precision=2), wall)
                table.errors += _error_rows(cfg, sigma, lam, dT, curve, cfg.mc_samples)
                table.timings.append((float(sigma), float(lam), float(dT), wall))
    return table


def run_converge_iters(cfg: ExperimentConfig) -> ResultTable:
    """error(k), k = 0..K, for every sigma and lambda at each configured coarse step."""
    return _sweep(cfg, cfg.dT_list)


def fit_order(points: Sequence[tuple[float, float]]) -> FitResult:
    """Least-squares line through (log dT, log error)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise DomainError("need at least 3 (dT, error) points")
    if np.any(~np.isfinite(pts)) or np.any(pts <= 0):
        raise DomainError("dT and error values must be positive and finite")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    return FitResult(float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))))


def run_converge_order(cfg: ExperimentConfig) -> ResultTable:
    """Error curves at several coarse steps plus fitted log-log slopes per k.

    A slope is NaN when some error in its group is not positive (exactly
    converged iterates), since no power law can be fitted.
    """
    if len(cfg.dT_list) < 3:
        raise ConfigError("dT", "order study needs at least 3 coarse steps")
    table = _sweep(cfg, cfg.dT_list)
    ks = cfg.orders_k or tuple(range(cfg.K + 1))
    for sigma in cfg.sigma_list:
        for lam in cfg.lambda_list:
            for k in ks:
                pts = [(dT, table.curve(sigma, lam, dT)[k]) for dT in cfg.dT_list]
                try:
                    fit = fit_order(pts)
                except DomainError:
                    fit = FitResult(math.nan, math.nan, math.nan)
                table.slopes.append(SlopeRow(cfg.name, float(sigma), float(lam), k, *fit))
    return table


def roughness(field_values: np.ndarray, baseline: np.ndarray) -> float:
    """Sample standard deviation of a field minus the noise-free field."""
    diff = np.asarray(field_values, dtype=float).ravel() - np.asarray(baseline, dtype=float).ravel()
    return float(np.std(diff, ddof=1))


def _single_run(cfg, op, lam, dT, u0, sample_index=0):
    runs = monte_carlo(cfg, op, noise_spec(cfg, lam), dT, u0, [sample_index], keep_final=True)
    (run,) = runs
    return run


def run_noise_impact(cfg: ExperimentConfig) -> ResultTable:
    """E_z(x, y, T) after K parareal iterations for each noise scale on one path."""
    if cfg.problem != "TM2D":
        raise ConfigError("problem", "noise-impact needs TM2D")
    table = ResultTable(cfg.name)
    grid = build_grid(cfg)
    u0 = initial_condition(grid)
    dT = cfg.dT_list[0]
    sigma = cfg.sigma_list[0]
    op = build_operator(cfg, grid, dT).with_sigma(sigma)
    lams = list(cfg.lambda_list)
    if 0.0 not in lams:
        lams = [0.0] + lams
    fields = {}
    for lam in lams:
        start = time.perf_counter()
        run = _single_run(cfg, op, lam, dT, u0)
        final = FieldState(grid, run.final[-1, 0])
        fields[lam] = final.component("E_z")
        if lam in cfg.lambda_list:
            table.snapshots.append((float(lam), final))
            table.errors += _error_rows(cfg, sigma, lam, dT, run.per_iteration_error, 1)
            table.timings.append((float(sigma), float(lam), float(dT), time.perf_counter() - start))
    for lam in cfg.lambda_list:
        table.roughness[float(lam)] = roughness(fields[lam], fields[0.0])
    return table


def run_solve(cfg: ExperimentConfig) -> ResultTable:
    """One parareal solve (first sigma, lambda and dT; sample 0) with its final state."""
    table = ResultTable(cfg.name)
    grid = build_grid(cfg)
    u0 = initial_condition(grid)
    dT, sigma, lam = cfg.dT_list[0], cfg.sigma_list[0], cfg.lambda_list[0]
    op = build_operator(cfg, grid, dT).with_sigma(sigma)
    start = time.perf_counter()
    run = _single_run(cfg, op, lam, dT, u0)
    table.errors += _error_rows(cfg, sigma, lam, dT, run.per_iteration_error, 1)
    table.snapshots.append((float(lam), FieldState(grid, run.final[-1, 0])))
    table.timings.append((float(sigma), float(lam), float(dT), time.perf_counter() - start))
    return table

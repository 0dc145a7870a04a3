"""Parareal time integration for damped stochastic Maxwell equations."""

from .errors import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    DomainError,
    EmptyInput,
    GridMismatch,
    MeshError,
    NoiseShapeError,
)
from .grid import FieldState, Grid, weighted_inner, weighted_norm
from .noise import (
    NoiseSpec,
    StandardBM,
    TraceClassSeries,
    WienerPath,
    coarse_increment,
    inject_noise,
    sample_path,
    sample_paths,
)
from .operator import DenseExp, KrylovExpmv, MaxwellOperator, apply_semigroup, assemble_1d, assemble_2d_tm
from .parareal import ParaRealRun, bound_envelope, iteration_errors, parareal_solve
from .propagators import (
    AffineDrift,
    PropagatorConfig,
    Trajectory,
    ZeroDrift,
    coarse_step,
    exponential_step,
    fine_sweep,
    reference_solve,
)

__version__ = "0.1.0"

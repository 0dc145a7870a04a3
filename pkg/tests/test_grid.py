import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parawell import FieldState, Grid, GridMismatch, weighted_inner, weighted_norm
from parawell.errors import DimensionError, DomainError

from conftest import random_state


def brute_inner(a, b):
    g = a.grid
    total = 0.0
    p = g.n_points
    for i in range(g.n_dof):
        coef = g.epsilon if i < p else g.mu
        total += coef * a.values[i] * b.values[i]
    return total * g.cell_area


def test_spacing_is_interior_node_layout():
    g = Grid.line(4, extent=2 * math.pi)
    assert g.dx == pytest.approx(2 * math.pi / 5)
    np.testing.assert_allclose(g.x_nodes(), 2 * math.pi / 5 * np.arange(1, 5))
    sq = Grid.square(99)
    assert sq.dx == pytest.approx(2 * math.pi / 100)
    assert sq.n_dof == 3 * 99 * 99


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(dimension=1, nx=1, extent_x=1.0),
        dict(dimension=1, nx=4, extent_x=1.0, epsilon=0.0),
        dict(dimension=1, nx=4, extent_x=1.0, mu=-1.0),
        dict(dimension=2, nx=4, extent_x=1.0, ny=1, extent_y=1.0),
    ],
)
def test_invalid_grids(kwargs):
    with pytest.raises(DomainError):
        Grid(**kwargs)


def test_dimension_three_rejected():
    with pytest.raises(DimensionError):
        Grid(3, 4, 1.0)


def test_zero_state():
    g = Grid.line(4)
    z = FieldState.zeros(g)
    assert weighted_inner(z, z) == 0.0
    assert weighted_norm(z) == 0.0


def test_constant_field_quadrature():
    g = Grid.line(4, extent=2 * math.pi)
    a = FieldState.from_components(g, E_z=1.0)
    assert weighted_inner(a, a) == pytest.approx(4 * 2 * math.pi / 5, rel=1e-15)


def test_weighted_norm_eps4():
    g = Grid.line(4, extent=2 * math.pi, epsilon=4.0, mu=1.0)
    a = FieldState.from_components(g, E_z=1.0)
    assert weighted_norm(a) == pytest.approx(math.sqrt(4 * 4 * 2 * math.pi / 5), rel=1e-15)


def test_inner_matches_brute_force(rng):
    g = Grid.line(8, epsilon=2.5, mu=0.7)
    a, b = random_state(g, rng), random_state(g, rng)
    assert weighted_inner(a, b) == pytest.approx(brute_inner(a, b), rel=1e-13)


def test_inner_matches_brute_force_2d(rng):
    g = Grid(2, 5, 1.0, 4, 2.0, epsilon=3.0, mu=0.5)
    a, b = random_state(g, rng), random_state(g, rng)
    assert weighted_inner(a, b) == pytest.approx(brute_inner(a, b), rel=1e-13)


def test_homogeneity(rng, line8):
    a = random_state(line8, rng)
    assert weighted_norm(-3 * a) == pytest.approx(3 * weighted_norm(a), rel=1e-14)


def test_grid_mismatch(rng):
    a = random_state(Grid.line(4), rng)
    b = random_state(Grid.line(5), rng)
    with pytest.raises(GridMismatch):
        weighted_inner(a, b)
    with pytest.raises(GridMismatch):
        a - FieldState.zeros(Grid.line(4, extent=1.0))


def test_batched_inner(rng, square8):
    a = random_state(square8, rng, (3,))
    b = random_state(square8, rng, (3,))
    out = weighted_inner(a, b)
    assert out.shape == (3,)
    for i in range(3):
        assert out[i] == pytest.approx(weighted_inner(a.sample(i), b.sample(i)), rel=1e-14)


def test_non_finite_rejected(line8):
    vals = np.zeros(line8.n_dof)
    vals[3] = np.nan
    with pytest.raises(DomainError):
        FieldState(line8, vals)


def test_component_layout():
    g = Grid(2, 3, 1.0, 2, 1.0)
    ez = np.arange(6.0).reshape(3, 2)
    s = FieldState.from_components(g, E_z=ez, H_y=7.0)
    np.testing.assert_array_equal(s.values[:6], [0, 1, 2, 3, 4, 5])
    np.testing.assert_array_equal(s.component("E_z"), ez)
    np.testing.assert_array_equal(s.component("H_x"), 0.0)
    np.testing.assert_array_equal(s.component("H_y"), 7.0)


def test_snapshot_csv(tmp_path):
    g = Grid(2, 2, 3.0, 2, 3.0)
    s = FieldState.from_components(g, E_z=[[1.0, 2.0], [3.0, 4.0]])
    s.to_csv(tmp_path / "snap.csv")
    lines = (tmp_path / "snap.csv").read_text().splitlines()
    assert lines[0] == "x,y,component,value"
    assert lines[1] == "1.0,1.0,E_z,1.0"
    assert lines[2] == "1.0,2.0,E_z,2.0"
    assert len(lines) == 1 + 3 * 4


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10), st.floats(0.1, 10))
def test_cauchy_schwarz_and_parallelogram(seed, eps, mu):
    rng = np.random.default_rng(seed)
    g = Grid.line(8, epsilon=eps, mu=mu)
    a, b = random_state(g, rng), random_state(g, rng)
    na, nb = weighted_norm(a), weighted_norm(b)
    assert abs(weighted_inner(a, b)) <= na * nb * (1 + 1e-12)
    lhs = weighted_norm(a + b) ** 2 + weighted_norm(a - b) ** 2
    rhs = 2 * na**2 + 2 * nb**2
    assert lhs == pytest.approx(rhs, rel=1e-12)
    assert weighted_inner(a, b) == pytest.approx(weighted_inner(b, a), rel=1e-15)

import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings, strategies as st

from parawell import Grid
from parawell.errors import ConfigError, NoiseShapeError
from parawell.noise import (
    NoiseSpec,
    StandardBM,
    TraceClassSeries,
    WienerPath,
    coarse_increment,
    dump_path,
    inject_noise,
    load_path,
    noise_matrix,
    sample_path,
    sample_paths,
    sample_seed,
)


def injected_path(values, N=1):
    f = np.asarray(values, dtype=float).reshape(1, N, -1, 1)
    return WienerPath((0,), N, f.shape[2], 0.1, f)


def python_sum(values):
    acc = 0.0
    for v in values:
        acc += float(v)
    return acc


def test_same_seed_same_path():
    spec = NoiseSpec(TraceClassSeries(n_modes=7))
    a = sample_path(spec, 42, 3, 4, 2.0**-8)
    b = sample_path(spec, 42, 3, 4, 2.0**-8)
    assert a.fine_increments.tobytes() == b.fine_increments.tobytes()
    c = sample_path(spec, 43, 3, 4, 2.0**-8)
    assert not np.array_equal(a.fine_increments, c.fine_increments)


def test_path_independent_of_split():
    spec = NoiseSpec()
    a = sample_path(spec, 7, 4, 8, 0.01)
    b = sample_path(spec, 7, 8, 4, 0.01)
    assert a.fine_increments.ravel().tobytes() == b.fine_increments.ravel().tobytes()
    np.testing.assert_array_equal(a.regroup(4).fine_increments, b.fine_increments)


def test_sample_paths_use_derived_seeds():
    spec = NoiseSpec()
    batch = sample_paths(spec, 99, [0, 5], 2, 3, 0.1)
    single = sample_path(spec, sample_seed(99, 5), 2, 3, 0.1)
    np.testing.assert_array_equal(batch.fine_increments[1], single.fine_increments[0])
    assert sample_seed(99, 0) != sample_seed(99, 1)
    assert sample_seed(99, 0) != sample_seed(98, 0)


def test_standard_bm_variance():
    dt = 2.0**-8
    path = sample_path(NoiseSpec(), 2024, 1000, 100, dt)
    x = path.fine_increments.ravel()
    assert x.size == 10**5
    var = x.var(ddof=1)
    se = dt * math.sqrt(2.0 / (x.size - 1))
    assert abs(var - dt) <= 3 * se
    assert abs(x.mean()) <= 3 * math.sqrt(dt / x.size)


def test_trace_class_eigenvalues():
    kind = TraceClassSeries(r=0.5, delta=0.001)
    lam = kind.eigenvalues()
    assert lam[0] == 1.0
    assert lam[1] == pytest.approx(2.0**-2.001, rel=1e-15)
    assert kind.n_modes == 100


def test_trace_monotone_and_bounded():
    traces = [TraceClassSeries(n_modes=m).truncated_trace() for m in (1, 2, 5, 10, 100, 1000)]
    assert all(b > a for a, b in zip(traces, traces[1:]))
    zeta = scipy.special.zeta(2.001)
    assert traces[-1] < zeta
    kind = TraceClassSeries(n_modes=100)
    assert kind.trace_remainder() == pytest.approx(zeta - kind.truncated_trace())
    assert 0 < kind.trace_remainder() < 1e-2 * kind.full_trace()


@pytest.mark.parametrize("kwargs", [dict(delta=0.0), dict(r=-0.1), dict(n_modes=0), dict(a=0.0)])
def test_invalid_trace_class(kwargs):
    with pytest.raises(ConfigError):
        TraceClassSeries(**kwargs)


def test_coarse_increment_single_step():
    path = sample_path(NoiseSpec(), 3, 5, 1, 0.1)
    for n in range(1, 6):
        np.testing.assert_array_equal(coarse_increment(path, n), path.fine_increment(n, 1))


def test_coarse_increment_injected_values():
    path = injected_path([0.1, -0.2, 0.05, 0.05])
    assert coarse_increment(path, 1)[0, 0] == python_sum([0.1, -0.2, 0.05, 0.05])
    assert coarse_increment(path, 1)[0, 0] == pytest.approx(0.0, abs=1e-16)


def test_coarse_increment_out_of_range():
    path = sample_path(NoiseSpec(), 3, 2, 2, 0.1)
    with pytest.raises(IndexError):
        coarse_increment(path, 0)
    with pytest.raises(IndexError):
        coarse_increment(path, 3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**63 - 1), st.integers(1, 6), st.integers(1, 9), st.booleans())
def test_aggregation_bitwise(seed, N, J, trace):
    kind = TraceClassSeries(n_modes=3) if trace else StandardBM()
    path = sample_path(NoiseSpec(kind, shared_w=False), seed, N, J, 0.01)
    for n in range(1, N + 1):
        got = coarse_increment(path, n)
        for c in range(path.channels):
            assert got[0, c] == python_sum(path.fine_increments[0, n - 1, :, c])


def test_coarsen_is_exact_sum():
    path = sample_path(NoiseSpec(), 11, 3, 8, 0.01)
    c = path.coarsen(4)
    assert c.n_fine_per_coarse == 2 and c.dt == pytest.approx(0.04)
    f = path.fine_increments
    assert c.fine_increments[0, 1, 0, 0] == python_sum(f[0, 1, :4, 0])
    assert c.fine_increments[0, 1, 1, 0] == python_sum(f[0, 1, 4:, 0])


def test_independence_of_steps():
    S = 4000
    path = sample_paths(NoiseSpec(), 5, range(S), 1, 2, 0.01)
    a = path.fine_increments[:, 0, 0, 0]
    b = path.fine_increments[:, 0, 1, 0]
    assert abs(np.corrcoef(a, b)[0, 1]) <= 3 / math.sqrt(S)


def test_independence_of_modes():
    path = sample_path(NoiseSpec(TraceClassSeries(n_modes=2)), 8, 1, 5000, 0.01)
    x = path.fine_increments[0, 0]
    assert abs(np.corrcoef(x[:, 0], x[:, 1])[0, 1]) <= 3 / math.sqrt(5000)


def test_inject_standard_bm():
    g = Grid.line(4)
    state = inject_noise(NoiseSpec(lambda_e=2.0, lambda_h=0.5), g, 0.3)
    np.testing.assert_allclose(state.component("E_z"), 0.6)
    np.testing.assert_allclose(state.component("H_y"), 0.15)


def test_inject_standard_bm_2d():
    g = Grid.square(3)
    state = inject_noise(NoiseSpec(lambda_e=1.0, lambda_h=3.0), g, [0.1])
    np.testing.assert_allclose(state.component("H_x"), 0.3)
    np.testing.assert_allclose(state.component("H_y"), 0.3)


def test_inject_zero_cases():
    g = Grid.line(6)
    spec = NoiseSpec(TraceClassSeries(n_modes=4))
    assert np.all(inject_noise(spec, g, np.zeros(4)).values == 0)
    silent = NoiseSpec(TraceClassSeries(n_modes=4), lambda_e=0.0, lambda_h=0.0)
    assert np.all(inject_noise(silent, g, np.ones(4)).values == 0)


def test_inject_single_mode_amplitude():
    # grid extent 2 with three interior nodes puts the middle node at x = 1
    g = Grid.line(3, extent=2.0)
    assert g.x_nodes()[1] == 1.0
    spec = NoiseSpec(TraceClassSeries(a=2.0, n_modes=1), lambda_e=1.0, lambda_h=0.0)
    state = inject_noise(spec, g, [1.0])
    assert state.component("E_z")[1] == pytest.approx(1.0, rel=1e-15)
    np.testing.assert_array_equal(state.component("H_y"), 0.0)


def test_inject_series_matches_direct_sum(rng):
    g = Grid(2, 5, 2 * math.pi, 3, 2 * math.pi)
    kind = TraceClassSeries(n_modes=6)
    spec = NoiseSpec(kind, lambda_e=1.5, lambda_h=-0.5)
    dbeta = rng.standard_normal(6)
    state = inject_noise(spec, g, dbeta)
    x = g.x_nodes()
    expect = np.zeros_like(x)
    for n in range(1, 7):
        expect += math.sqrt(2 / kind.a) * n ** (-kind.exponent / 2) * np.sin(n * math.pi * x / kind.a) * dbeta[n - 1]
    for iy in range(3):
        np.testing.assert_allclose(state.component("E_z")[:, iy], 1.5 * expect, atol=1e-14)
        np.testing.assert_allclose(state.component("H_x")[:, iy], -0.5 * expect, atol=1e-14)


def test_independent_channels_for_h():
    g = Grid.line(4)
    spec = NoiseSpec(lambda_e=1.0, lambda_h=1.0, shared_w=False)
    assert spec.channels == 2
    state = inject_noise(spec, g, [0.2, -0.7])
    np.testing.assert_allclose(state.component("E_z"), 0.2)
    np.testing.assert_allclose(state.component("H_y"), -0.7)


def test_shape_mismatch():
    g = Grid.line(4)
    with pytest.raises(NoiseShapeError):
        inject_noise(NoiseSpec(TraceClassSeries(n_modes=3)), g, np.ones(2))


def test_noise_matrix_shape():
    g = Grid.square(4)
    B = noise_matrix(NoiseSpec(TraceClassSeries(n_modes=5)), g)
    assert B.shape == (5, g.n_dof)


def test_dump_load_round_trip(tmp_path):
    spec = NoiseSpec(TraceClassSeries(n_modes=3))
    path = sample_paths(spec, 17, range(3), 2, 5, 2.0**-6)
    dump_path(path, spec, tmp_path / "p.bin")
    back = load_path(tmp_path / "p.bin")
    assert back.seeds == path.seeds
    assert (back.n_coarse, back.n_fine_per_coarse, back.dt) == (2, 5, 2.0**-6)
    assert back.fine_increments.tobytes() == path.fine_increments.tobytes()


def test_load_rejects_garbage(tmp_path):
    (tmp_path / "bad.bin").write_bytes(b"\0" * 64)
    with pytest.raises(NoiseShapeError):
        load_path(tmp_path / "bad.bin")

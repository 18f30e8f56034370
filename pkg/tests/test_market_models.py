import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rrmc.errors import ConfigError, FactorizationError
from rrmc.market_models import (GBMParams, PathSet, TimeGrid, cholesky, equicorrelation,
                                simulate)


def test_time_grid_validation():
    g = TimeGrid.uniform(3.0, 9)
    assert g.num_dates == 9 and g.maturity == pytest.approx(3.0)
    assert np.allclose(g.steps, 1 / 3)
    for bad in [(), (1.0, 1.0), (0.0, 1.0), (2.0, 1.0)]:
        with pytest.raises(ConfigError):
            TimeGrid(bad)


def test_cholesky_identity_and_closed_form():
    assert np.array_equal(cholesky(np.eye(4)), np.eye(4))
    c = cholesky(np.array([[1.0, 0.5], [0.5, 1.0]]))
    assert np.allclose(c, [[1, 0], [0.5, np.sqrt(0.75)]], atol=1e-15)


def test_cholesky_equicorrelation_20_reconstructs():
    corr = equicorrelation(20, 0.8)
    low = cholesky(corr)
    assert np.max(np.abs(low @ low.T - corr)) < 1e-12
    assert np.allclose(low, np.tril(low))


def test_cholesky_indefinite_names_pivot():
    corr = np.array([[1.0, 0.9, 0.9], [0.9, 1.0, -0.9], [0.9, -0.9, 1.0]])
    with pytest.raises(FactorizationError) as info:
        cholesky(corr)
    assert info.value.pivot == 2
    assert "2" in str(info.value)


def test_cholesky_rank_one_perfect_correlation_allowed():
    low = cholesky(np.ones((3, 3)))
    assert np.max(np.abs(low @ low.T - 1)) < 1e-12


@given(st.integers(1, 12), st.floats(-0.05, 0.99))
@settings(max_examples=40, deadline=None)
def test_cholesky_reconstruction_property(dim, rho):
    if dim > 1 and rho < -1 / (dim - 1):
        return
    corr = equicorrelation(dim, rho)
    low = cholesky(corr)
    assert np.max(np.abs(low @ low.T - corr)) < 1e-12


def test_params_validation():
    with pytest.raises(ConfigError):
        GBMParams(0.05, 0.0, (0.2, -0.1), np.eye(2), (100.0, 100.0))
    with pytest.raises(ConfigError):
        GBMParams(0.05, 0.0, (0.2,), np.eye(1), (0.0,))
    with pytest.raises(FactorizationError):
        GBMParams(0.05, 0.0, (0.2, 0.2), np.array([[1.0, 0.3], [0.2, 1.0]]), (1.0, 1.0))
    p = GBMParams.symmetric(3, 0.05, 0.1, 0.2, 100.0, 0.5)
    assert GBMParams.from_dict(p.to_dict()).to_dict() == p.to_dict()


def test_zero_vol_deterministic_growth():
    p = GBMParams(0.05, 0.0, (0.0,), np.eye(1), (100.0,))
    paths = simulate(p, TimeGrid((1.0, 2.0)), 5, 1)
    assert np.allclose(paths.states[:, 0, 0], 100 * np.exp(0.05), rtol=1e-14)
    assert np.allclose(paths.states[:, 1, 0], 100 * np.exp(0.1), rtol=1e-14)


def test_simulation_bit_reproducible_and_read_only():
    p = GBMParams.symmetric(3, 0.05, 0.1, 0.2, 100.0, 0.3)
    g = TimeGrid.uniform(1.0, 4)
    a, b = simulate(p, g, 100, 9), simulate(p, g, 100, 9)
    assert a.states.tobytes() == b.states.tobytes()
    assert np.array_equal(a.states[:10], simulate(p, g, 10, 9).states)
    assert not a.states.flags.writeable
    assert np.all(a.states > 0)


def test_perfect_correlation_equal_coordinates():
    p = GBMParams.symmetric(2, 0.05, 0.1, 0.2, 100.0, 1.0)
    s = simulate(p, TimeGrid.uniform(3.0, 9), 200, 4).states
    assert np.allclose(s[..., 0], s[..., 1], rtol=1e-13)


def test_terminal_mean_lognormal_identity():
    p = GBMParams.symmetric(1, 0.05, 0.1, 0.2, 100.0)
    z = simulate(p, TimeGrid.uniform(3.0, 9), 1_000_000, 21).states[:, -1, 0]
    target = 100 * np.exp((0.05 - 0.1) * 3)
    assert target == pytest.approx(86.071, abs=1e-3)
    assert abs(z.mean() - target) < 3 * z.std() / np.sqrt(z.size)


def test_discounted_martingale_every_date():
    p = GBMParams.symmetric(3, 0.05, 0.1, 0.2, 100.0, 0.4)
    g = TimeGrid.uniform(3.0, 9)
    s = simulate(p, g, 100_000, 5).states
    disc = np.exp(-(0.05 - 0.1) * g.times)[None, :, None]
    x = s * disc
    se = x.std(axis=0) / np.sqrt(s.shape[0])
    assert np.all(np.abs(x.mean(axis=0) - 100) < 4 * se)


def test_markov_step_consistency():
    p = GBMParams.symmetric(1, 0.05, 0.0, 0.3, 100.0)
    direct = simulate(p, TimeGrid((2.0,)), 100_000, 6).states[:, 0, 0]
    stepped = simulate(p, TimeGrid((1.0, 2.0)), 100_000, 7).states[:, 1, 0]
    se = np.hypot(direct.std(), stepped.std()) / np.sqrt(direct.size)
    assert abs(direct.mean() - stepped.mean()) < 4 * se
    lv, rv = np.log(direct).var(), np.log(stepped).var()
    assert abs(lv - rv) < 4 * lv * np.sqrt(4 / direct.size)


def test_path_dump_roundtrip(tmp_path):
    p = GBMParams.symmetric(2, 0.05, 0.1, 0.2, 100.0)
    g = TimeGrid.uniform(1.0, 3)
    a = simulate(p, g, 7, 3)
    f = tmp_path / "paths.bin"
    a.dump(f)
    raw = f.read_bytes()
    assert np.frombuffer(raw[:32], "<u8").tolist() == [7, 3, 2, 3]
    assert len(raw) == 32 + 8 * 7 * 3 * 2
    b = PathSet.load(f, g)
    assert np.array_equal(a.states, b.states) and b.seed == 3
    with pytest.raises(ConfigError):
        PathSet.load(f, TimeGrid.uniform(1.0, 4))


def test_simulate_rejects_no_paths():
    p = GBMParams.symmetric(1, 0.05, 0.0, 0.2, 100.0)
    with pytest.raises(ConfigError):
        simulate(p, TimeGrid((1.0,)), 0, 1)

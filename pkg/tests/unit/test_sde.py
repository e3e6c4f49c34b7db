"""Euler 混合路径模拟单元测试"""

import numpy as np
import pytest

from hybrid_merton.core.errors import DimensionMismatch, NonFiniteState
from hybrid_merton.hybridsim import (
    HybridSDE,
    alpha_slope,
    euler_step,
    regime_statistics,
    sample_regime_paths,
    simulate_block,
    simulate_paths,
    time_grid,
)

RATES = np.array([0.05, 0.01])


def zero_drift(t, x, regimes):
    return np.zeros_like(x)


def zero_noise(t, x, regimes):
    return np.zeros(x.shape + (1,))


def unit_noise(t, x, regimes):
    return np.ones(x.shape + (1,))


def regime_drift(t, x, regimes):
    return np.repeat(RATES[regimes][:, None], x.shape[1], axis=1)


def growth_drift(t, x, regimes):
    return RATES[regimes][:, None] * x


def make_sde(drift=zero_drift, brownian=zero_noise, canonical=zero_noise, x0=0.0) -> HybridSDE:
    return HybridSDE(
        drift=drift,
        brownian_coeff=brownian,
        canonical_coeff=canonical,
        x0=np.array([x0]),
        n_brownian=1,
        n_canonical=1,
    )


class _KillAbove:
    """状态超过阈值时拒绝路径"""

    def __init__(self, level: float) -> None:
        self.level = level
        self.calls = 0

    def on_piece(self, idx, t0, t1, regimes, x_old, x_new):
        self.calls += 1
        return x_new[:, 0, 0] > self.level


class TestHybridSDE:
    """系统定义测试"""

    def test_dim(self) -> None:
        sde = make_sde(x0=2.0)
        assert sde.dim == 1
        assert sde.with_initial([3.0]).x0[0] == 3.0
        assert sde.x0[0] == 2.0

    def test_invalid_dimensions(self) -> None:
        with pytest.raises(DimensionMismatch):
            HybridSDE(zero_drift, zero_noise, zero_noise, np.array([0.0]), 0, 1)
        with pytest.raises(DimensionMismatch):
            HybridSDE(zero_drift, zero_noise, zero_noise, np.zeros((2, 2)), 1, 1)


class TestEulerStep:
    """单步 Euler 测试"""

    def test_shapes_and_value(self) -> None:
        """测试 x + f·Δt + g·ΔB + h·ΔC"""
        sde = make_sde(brownian=unit_noise, canonical=unit_noise)
        x = np.zeros((2, 3, 1))
        slope = alpha_slope([0.2, 0.5, 0.8])
        dt = np.array([0.1, 0.2])
        db = np.array([[0.3], [-0.1]])
        out = euler_step(sde, np.zeros(2), x, np.array([0, 1]), dt, db, slope)
        assert out.shape == (2, 3, 1)
        expected = db[:, 0][:, None] + slope[None, :] * dt[:, None]
        np.testing.assert_allclose(out[:, :, 0], expected, rtol=1e-14)


class TestSimulateBlock:
    """单块模拟测试"""

    def test_zero_coefficients(self, two_regime_generator, rng) -> None:
        sde = make_sde(x0=1.5)
        batch = sample_regime_paths(two_regime_generator, 0, 1.0, 50, rng)
        bundle = simulate_block(sde, batch, time_grid(1.0, 20), [0.3, 0.7], rng)
        np.testing.assert_array_equal(bundle.terminal, 1.5)
        assert bundle.terminal.shape == (50, 2, 1)
        assert bundle.state.shape == (50, 2, 21, 1)
        assert np.all(bundle.alive)

    def test_regime_nodes_right_continuous(self, two_regime_generator, rng) -> None:
        """测试节点体制与体制路径一致"""
        batch = sample_regime_paths(two_regime_generator, 1, 1.0, 300, rng)
        times = time_grid(1.0, 50)
        bundle = simulate_block(make_sde(), batch, times, [0.5], rng)
        for k, t in enumerate(times):
            np.testing.assert_array_equal(bundle.regimes[:, k], batch.regime_at(t))

    def test_regime_drift_exact(self, two_regime_generator, rng) -> None:
        """测试步内跳跃拆分后 ∫r_ζ dt 精确累积"""
        batch = sample_regime_paths(two_regime_generator, 0, 1.0, 400, rng)
        bundle = simulate_block(make_sde(drift=regime_drift), batch, time_grid(1.0, 10), [0.5], rng)
        occupation = regime_statistics(batch, 2).occupation
        np.testing.assert_allclose(bundle.terminal[:, 0, 0], occupation @ RATES, atol=1e-13)

    def test_growth_first_order(self, two_regime_generator, rng) -> None:
        """测试 dX = r_ζ X dt 的 Euler 解与 exp(∫r) 相差 O(Δt)"""
        batch = sample_regime_paths(two_regime_generator, 0, 1.0, 200, rng)
        sde = make_sde(drift=growth_drift, x0=1.0)
        bundle = simulate_block(sde, batch, time_grid(1.0, 1000), [0.5], rng)
        exact = np.exp(regime_statistics(batch, 2).occupation @ RATES)
        np.testing.assert_allclose(bundle.terminal[:, 0, 0], exact, atol=1e-5)

    def test_canonical_follows_alpha_path(self, two_regime_generator, rng) -> None:
        """测试 h = 1 时状态等于 α-路径"""
        sde = make_sde(canonical=unit_noise)
        batch = sample_regime_paths(two_regime_generator, 0, 2.0, 20, rng)
        bundle = simulate_block(sde, batch, time_grid(2.0, 40), [0.1, 0.5, 0.9], rng)
        expected = bundle.canonical_path()
        for b in range(20):
            np.testing.assert_allclose(bundle.state[b, :, :, 0], expected, atol=1e-12)
        np.testing.assert_allclose(bundle.canonical_terminal(), expected[:, -1])

    def test_brownian_bookkeeping(self, two_regime_generator, rng) -> None:
        """测试 g = 1 时 X_T − x0 = B_T，且各步增量之和为 B_T"""
        sde = make_sde(brownian=unit_noise)
        batch = sample_regime_paths(two_regime_generator, 0, 1.0, 100, rng)
        bundle = simulate_block(sde, batch, time_grid(1.0, 25), [0.5], rng)
        np.testing.assert_allclose(bundle.terminal[:, 0, 0], bundle.brownian_terminal[:, 0], atol=1e-12)
        np.testing.assert_allclose(bundle.brownian_path()[:, -1], bundle.brownian_terminal, atol=1e-12)

    def test_brownian_variance(self, two_regime_generator) -> None:
        """测试拆分步内的增量仍满足 Var(B_T) = T"""
        rng = np.random.default_rng(17)
        batch = sample_regime_paths(two_regime_generator, 0, 1.0, 20000, rng)
        bundle = simulate_block(make_sde(), batch, time_grid(1.0, 10), [0.5], rng, keep_paths=False)
        var = bundle.brownian_terminal[:, 0].var(ddof=1)
        # Var 的标准误约为 √(2/n)
        assert abs(var - 1.0) < 4.0 * np.sqrt(2.0 / 20000)

    def test_keep_paths_false(self, two_regime_generator, rng) -> None:
        batch = sample_regime_paths(two_regime_generator, 0, 1.0, 10, rng)
        bundle = simulate_block(make_sde(), batch, time_grid(1.0, 5), [0.5], rng, keep_paths=False)
        assert bundle.brownian is None
        assert bundle.state is None
        with pytest.raises(ValueError):
            bundle.brownian_path()

    def test_observer_rejects_paths(self, two_regime_generator, rng) -> None:
        """测试被拒绝的路径冻结在越界值"""
        observer = _KillAbove(0.5)
        batch = sample_regime_paths(two_regime_generator, 0, 1.0, 500, rng)
        sde = make_sde(brownian=unit_noise)
        bundle = simulate_block(sde, batch, time_grid(1.0, 50), [0.5], rng, observer=observer)
        assert observer.calls >= 50
        assert 0 < np.count_nonzero(~bundle.alive) < 500
        assert np.all(bundle.state[bundle.alive, 0, :, 0] <= 0.5)
        assert np.all(bundle.terminal[~bundle.alive, 0, 0] > 0.5)

    def test_non_finite_state(self, two_regime_generator, rng) -> None:
        def exploding(t, x, regimes):
            return np.full_like(x, np.inf)

        batch = sample_regime_paths(two_regime_generator, 0, 1.0, 5, rng)
        with pytest.raises(NonFiniteState):
            simulate_block(make_sde(drift=exploding), batch, time_grid(1.0, 5), [0.5], rng)


class TestSimulatePaths:
    """分块模拟测试"""

    def test_blocks(self, two_regime_generator) -> None:
        bundles = simulate_paths(
            make_sde(brownian=unit_noise), two_regime_generator, 0, 1.0, 10, 250, [0.5], 3,
            threads=2, block_size=100,
        )
        assert [b.n_paths for b in bundles] == [100, 100, 50]
        assert bundles[0].horizon == 1.0

    def test_thread_invariant(self, two_regime_generator) -> None:
        """测试同一种子下结果与线程数无关"""
        kwargs = dict(horizon=1.0, steps=10, n_paths=300, alpha=[0.5], rng_seed=8, block_size=64)
        sde = make_sde(brownian=unit_noise)
        one = simulate_paths(sde, two_regime_generator, 0, threads=1, **kwargs)
        four = simulate_paths(sde, two_regime_generator, 0, threads=4, **kwargs)
        for a, b in zip(one, four):
            np.testing.assert_array_equal(a.terminal, b.terminal)
            np.testing.assert_array_equal(a.regimes, b.regimes)

    def test_time_grid(self) -> None:
        times = time_grid(0.7, 7)
        assert times[-1] == 0.7
        assert times.size == 8
        with pytest.raises(ValueError):
            time_grid(1.0, 0)

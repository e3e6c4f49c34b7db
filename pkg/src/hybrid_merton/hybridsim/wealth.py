"""最优策略下财富方程的闭环模拟与目标泛函估计。

财富方程（名义财富 W，投资比例 π，消费率 c）：

    dW = [r_i W + W πᵀ(α_i − r_i 1) − c] dt + W πᵀσ_i dB + W πᵀη_i dC，

代入 ĉ = W/A_i(t)、π̂ = (1/κ)(σ_iᵀ)⁻¹θ_i 后为关于 W 的线性系统。
确定性漂移 (r_i + π̂ᵀ(α_i − r_i 1) − 1/A_i(t))W 在每段上按指数精确积分，
噪声项仍为 Euler 增量。
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import trapezoid

from hybrid_merton.core.errors import NonPositiveWealth, TooManyRejectedPaths
from hybrid_merton.hybridsim.canonical import gauss_legendre_unit
from hybrid_merton.hybridsim.expectation import (
    MIN_ALPHA_NODES,
    ChanceEstimate,
    Functional,
    summarize,
)
from hybrid_merton.hybridsim.parallel import DEFAULT_BLOCK_SIZE, run_blocks
from hybrid_merton.hybridsim.regimes import sample_regime_paths
from hybrid_merton.hybridsim.sde import HybridPathBundle, HybridSDE, simulate_block, time_grid
from hybrid_merton.market.generator import check_regime
from hybrid_merton.policy.policy_map import PolicyMap, optimal_portfolio

logger = logging.getLogger(__name__)

# 财富触及非正值的路径比例上限
MAX_REJECTED_FRACTION = 1e-3


@dataclass(frozen=True, eq=False)
class _WealthCoefficients:
    growth: NDArray[np.float64]  # r_i + π̂_iᵀ(α_i − r_i 1)
    brownian: NDArray[np.float64]  # σ_iᵀπ̂_i，形状 (S, m)
    canonical: NDArray[np.float64]  # η_iᵀπ̂_i，形状 (S, n)


def _coefficients(pm: PolicyMap) -> _WealthCoefficients:
    mkt = pm.mkt
    pi = np.stack([optimal_portfolio(pm, 0.0, i) for i in range(mkt.n_regimes)])
    excess = mkt.alpha - mkt.r[:, None]
    return _WealthCoefficients(
        growth=mkt.r + np.sum(pi * excess, axis=1),
        brownian=np.einsum("sm,smk->sk", pi, mkt.sigma),
        canonical=np.einsum("sm,smn->sn", pi, mkt.eta),
    )


def wealth_sde(pm: PolicyMap, x0: float = 1.0) -> HybridSDE:
    """最优闭环下的财富方程，状态维数 p = 1。"""
    coeffs = _coefficients(pm)
    grid = pm.grid

    def drift(
        t: NDArray[np.float64], x: NDArray[np.float64], i: NDArray[np.intp]
    ) -> NDArray[np.float64]:
        w = x[:, 0]
        return ((coeffs.growth[i] - 1.0 / grid.evaluate(t, i)) * w)[:, None]

    def drift_increment(
        t0: NDArray[np.float64],
        t1: NDArray[np.float64],
        x: NDArray[np.float64],
        i: NDArray[np.intp],
    ) -> NDArray[np.float64]:
        # 线性漂移按段精确积分，∫1/A_i 用 Simpson 公式
        dt = t1 - t0
        inv_a = (
            1.0 / grid.evaluate(t0, i)
            + 4.0 / grid.evaluate(0.5 * (t0 + t1), i)
            + 1.0 / grid.evaluate(t1, i)
        )
        log_growth = coeffs.growth[i] * dt - dt / 6.0 * inv_a
        return (np.expm1(log_growth) * x[:, 0])[:, None]

    def brownian_coeff(
        t: NDArray[np.float64], x: NDArray[np.float64], i: NDArray[np.intp]
    ) -> NDArray[np.float64]:
        return (x[:, 0, None] * coeffs.brownian[i])[:, None, :]

    def canonical_coeff(
        t: NDArray[np.float64], x: NDArray[np.float64], i: NDArray[np.intp]
    ) -> NDArray[np.float64]:
        return (x[:, 0, None] * coeffs.canonical[i])[:, None, :]

    return HybridSDE(
        drift=drift,
        brownian_coeff=brownian_coeff,
        canonical_coeff=canonical_coeff,
        x0=np.array([x0], dtype=np.float64),
        n_brownian=pm.mkt.n_assets,
        n_canonical=pm.mkt.n_canonical,
        drift_increment=drift_increment,
    )


def objective_functional(pm: PolicyMap) -> Functional:
    """目标泛函 ∫₀ᵀ e^{−βs}U(ĉ)ds + e^{−βT}U(W_T)，在完整路径块上用节点梯形公式计算。"""
    util = pm.util
    grid = pm.grid

    def functional(bundle: HybridPathBundle) -> NDArray[np.float64]:
        if bundle.state is None:
            raise ValueError("目标泛函需要完整路径")
        times = bundle.times
        wealth = bundle.state[..., 0]
        a = grid.evaluate(times[None, :], bundle.regimes)
        discount = np.exp(-util.beta * times)
        running = discount * util.utility(wealth / a[:, None, :])
        terminal = discount[-1] * util.utility(wealth[..., -1])
        return np.asarray(trapezoid(running, times, axis=-1) + terminal, dtype=np.float64)

    return functional


@dataclass(eq=False)
class _UtilityAccumulator:
    """逐段累积 e^{−βs}U(ĉ) 的梯形积分，并拒绝财富非正的路径。"""

    pm: PolicyMap
    total: NDArray[np.float64]
    rejected: NDArray[np.bool_] = field(init=False)

    def __post_init__(self) -> None:
        self.rejected = np.zeros(self.total.shape[0], dtype=bool)

    def on_piece(
        self,
        idx: NDArray[np.intp],
        t0: NDArray[np.float64],
        t1: NDArray[np.float64],
        regimes: NDArray[np.intp],
        x_old: NDArray[np.float64],
        x_new: NDArray[np.float64],
    ) -> NDArray[np.bool_]:
        w0 = x_old[..., 0]
        w1 = x_new[..., 0]
        kill = np.any(w1 <= 0.0, axis=1)
        keep = ~kill
        if np.any(keep):
            beta = self.pm.util.beta
            util = self.pm.util.utility
            a0 = self.pm.grid.evaluate(t0[keep], regimes[keep])
            a1 = self.pm.grid.evaluate(t1[keep], regimes[keep])
            u0 = np.exp(-beta * t0[keep])[:, None] * util(w0[keep] / a0[:, None])
            u1 = np.exp(-beta * t1[keep])[:, None] * util(w1[keep] / a1[:, None])
            self.total[idx[keep]] += 0.5 * (t1[keep] - t0[keep])[:, None] * (u0 + u1)
        self.rejected[idx[kill]] = True
        return kill


def simulate_wealth(
    pm: PolicyMap,
    x0: float,
    i0: int,
    n_paths: int,
    alpha_nodes: int,
    steps: int,
    rng_seed: int,
    *,
    threads: Optional[int] = None,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> ChanceEstimate:
    """最优策略下目标泛函 J 的机会期望估计。

    所有 η_i 为零时泛函与 α 无关，α 维退化为单个节点。

    Raises:
        NonPositiveWealth: x0 ≤ 0
        TooManyRejectedPaths: 超过 0.1% 的路径财富触及非正值
    """
    if not np.isfinite(x0) or x0 <= 0.0:
        raise NonPositiveWealth(x0)
    i0 = check_regime(i0, pm.mkt.n_regimes)
    if pm.mkt.has_uncertain_volatility:
        if alpha_nodes < MIN_ALPHA_NODES:
            raise ValueError(f"alpha_nodes 至少为 {MIN_ALPHA_NODES}，得到 {alpha_nodes}")
        nodes, weights = gauss_legendre_unit(alpha_nodes)
    else:
        nodes, weights = np.array([0.5]), np.array([1.0])

    horizon = pm.horizon
    times = time_grid(horizon, steps)
    sde = wealth_sde(pm, x0)
    util = pm.util

    def task(
        _: int, size: int, rng: np.random.Generator
    ) -> tuple[NDArray[np.float64], int]:
        batch = sample_regime_paths(pm.mkt.generator, i0, horizon, size, rng)
        acc = _UtilityAccumulator(pm, np.zeros((size, nodes.size)))
        bundle = simulate_block(sde, batch, times, nodes, rng, observer=acc, keep_paths=False)
        alive = bundle.alive
        terminal = np.exp(-util.beta * horizon) * util.utility(bundle.terminal[alive, :, 0])
        objective = acc.total[alive] + terminal
        return np.asarray(objective @ weights, dtype=np.float64), int(np.count_nonzero(~alive))

    results = run_blocks(task, n_paths, rng_seed, threads, block_size)
    rejected = sum(count for _, count in results)
    if rejected > MAX_REJECTED_FRACTION * n_paths:
        raise TooManyRejectedPaths(rejected, n_paths, MAX_REJECTED_FRACTION)
    if rejected:
        logger.warning("%d 条路径财富触及非正值，已剔除", rejected)

    estimate = summarize(
        np.concatenate([values for values, _ in results]), int(nodes.size), rejected
    )
    logger.info(
        "财富模拟: J = %.6g ± %.2g (%d 条路径, %d 步)",
        estimate.mean,
        estimate.std_error,
        n_paths,
        steps,
    )
    return estimate

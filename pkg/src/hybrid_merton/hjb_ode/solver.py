"""体制系数 A_i(t) 的后向耦合非线性 ODE 求解器。

价值函数取 V(t,x,i) = A_i(t)^κ x^{1−κ}/(1−κ) 的形式后，HJB 方程化为

    κ A_i^{κ−1} A_i' − ρ_i A_i^κ + κ A_i^{κ−1} + Σ_{j≠i} q_ij A_j^κ = 0,  A_i(T) = 1。

两边除以 κ A_i^{κ−1}（A_i > 0 时合法）得到显式形式

    A_i' = (ρ_i/κ) A_i − 1 − (1/κ) Σ_{j≠i} q_ij (A_j/A_i)^κ A_i，

用定步长经典四阶 Runge-Kutta 从 T 向 0 积分。
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from hybrid_merton.core.errors import NonFinite, NonPositiveA
from hybrid_merton.hjb_ode.grid import SolutionGrid
from hybrid_merton.hjb_ode.utility import UtilitySpec
from hybrid_merton.market.market import RegimeMarket, market_price_of_risk

logger = logging.getLogger(__name__)

DEFAULT_STEPS = 2000
MIN_STEPS = 10
EPS_POS = 1e-12


@dataclass(frozen=True, eq=False)
class RhoVector:
    """各体制的系数 ρ_i = β + λ_i − (1−κ) r_i − ((1−κ)/(2κ)) |θ_i|²。

    同时保存计算 ρ 所用的输入，便于复核。
    """

    rho: NDArray[np.float64]
    kappa: float
    beta: float
    lambdas: NDArray[np.float64]
    r: NDArray[np.float64]
    theta_sq: NDArray[np.float64]

    def recompute(self) -> NDArray[np.float64]:
        """由存储的输入重新计算 ρ。"""
        k = self.kappa
        return np.asarray(
            self.beta + self.lambdas - (1.0 - k) * self.r - (1.0 - k) / (2.0 * k) * self.theta_sq,
            dtype=np.float64,
        )

    def __getitem__(self, i: int) -> float:
        return float(self.rho[i])


def compute_rho(mkt: RegimeMarket, util: UtilitySpec) -> RhoVector:
    """计算 ρ_i。"""
    theta_sq = market_price_of_risk(mkt).squared_norms()
    k = util.kappa
    rho = util.beta + mkt.lambdas - (1.0 - k) * mkt.r - (1.0 - k) / (2.0 * k) * theta_sq
    rho.setflags(write=False)
    return RhoVector(
        rho=rho,
        kappa=k,
        beta=util.beta,
        lambdas=mkt.lambdas,
        r=np.array(mkt.r),
        theta_sq=theta_sq,
    )


def _off_diagonal(mkt: RegimeMarket) -> NDArray[np.float64]:
    off = np.array(mkt.generator.q)
    np.fill_diagonal(off, 0.0)
    return off


def rhs(
    t: float,
    values: ArrayLike,
    mkt: RegimeMarket,
    util: UtilitySpec,
    rho: RhoVector,
) -> NDArray[np.float64]:
    """归一化 ODE 右端 A' = f(A)，对 A 的前导维度向量化（最后一维为体制）。

    系数为常数，t 不参与计算。
    """
    a = np.asarray(values, dtype=np.float64)
    kappa = util.kappa
    off = _off_diagonal(mkt)
    ratio = np.power(a[..., None, :] / a[..., :, None], kappa)
    coupling = np.sum(off * ratio, axis=-1) * a
    return np.asarray(rho.rho / kappa * a - 1.0 - coupling / kappa, dtype=np.float64)


def _check_stage(stage: NDArray[np.float64], t: float) -> None:
    if not np.all(np.isfinite(stage)):
        raise NonFinite(t)
    low = np.flatnonzero(stage <= EPS_POS)
    if low.size:
        i = int(low[0])
        raise NonPositiveA(t, i, float(stage[i]))


def solve_backward(
    mkt: RegimeMarket, util: UtilitySpec, steps: int = DEFAULT_STEPS
) -> SolutionGrid:
    """从 A_i(T) = 1 出发，以经典 RK4 向后积分到 t = 0。

    Args:
        mkt: 已校验的市场
        util: 效用参数
        steps: 均匀步数（≥ 10），步长 T/steps

    Returns:
        前向时间顺序的 SolutionGrid

    Raises:
        ValueError: steps < 10
        NonPositiveA: 任一阶段 A_i ≤ 1e-12
        NonFinite: 任一阶段出现溢出或 NaN
    """
    if steps < MIN_STEPS:
        raise ValueError(f"steps 至少为 {MIN_STEPS}，得到 {steps}")

    rho = compute_rho(mkt, util)
    horizon = mkt.horizon
    h = horizon / steps
    times = np.linspace(0.0, horizon, steps + 1)
    times[-1] = horizon

    def backward(a: NDArray[np.float64], t: float) -> NDArray[np.float64]:
        _check_stage(a, t)
        return -rhs(t, a, mkt, util, rho)

    values = np.empty((steps + 1, mkt.n_regimes))
    values[steps] = 1.0
    a = values[steps].copy()
    # 逆时间 s = T − t 上做标准 RK4
    for k in range(steps, 0, -1):
        t = times[k]
        k1 = backward(a, t)
        k2 = backward(a + 0.5 * h * k1, t - 0.5 * h)
        k3 = backward(a + 0.5 * h * k2, t - 0.5 * h)
        k4 = backward(a + h * k3, t - h)
        a = a + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_stage(a, times[k - 1])
        values[k - 1] = a

    derivatives = rhs(0.0, values, mkt, util, rho)
    logger.info(
        "ODE 求解完成: S=%d, steps=%d, A(0)=%s", mkt.n_regimes, steps, np.array2string(values[0])
    )
    return SolutionGrid(times=times, values=values, derivatives=derivatives)


def merton_coefficient(t: ArrayLike, a: float, horizon: float) -> NDArray[np.float64]:
    """单体制（无切换）时的解析解。

    A(t) = (1/a)(1 − e^{−a(T−t)}) + e^{−a(T−t)}，a = ρ/κ；a → 0 时为 1 + (T − t)。
    """
    tau = horizon - np.asarray(t, dtype=np.float64)
    if abs(a) < 1e-12:
        return np.asarray(1.0 + tau, dtype=np.float64)
    return np.asarray(-np.expm1(-a * tau) / a + np.exp(-a * tau), dtype=np.float64)


def analytic_grid(a: float, horizon: float, steps: int) -> SolutionGrid:
    """由解析解及其精确导数 A' = aA − 1 构造的单体制网格。"""
    times = np.linspace(0.0, horizon, steps + 1)
    values = merton_coefficient(times, a, horizon)
    values[-1] = 1.0
    return SolutionGrid(
        times=times,
        values=values[:, None],
        derivatives=(a * values - 1.0)[:, None],
    )


def self_consistency_residual(grid: SolutionGrid, mkt: RegimeMarket, util: UtilitySpec) -> float:
    """把网格代回未归一化方程，导数用中心差分。

    内部节点上的残差除以 κ A_i^{κ−1}（使其与 A 同量纲），
    返回最大值与 max_i A_i 之比。
    """
    rho = compute_rho(mkt, util).rho
    kappa = util.kappa
    a = grid.values
    h = grid.step
    slope = (a[2:] - a[:-2]) / (2.0 * h)
    inner = a[1:-1]
    off = _off_diagonal(mkt)
    coupling = np.power(inner, kappa) @ off.T
    residual = (
        kappa * np.power(inner, kappa - 1.0) * slope
        - rho * np.power(inner, kappa)
        + kappa * np.power(inner, kappa - 1.0)
        + coupling
    )
    scaled = residual / (kappa * np.power(inner, kappa - 1.0))
    return float(np.max(np.abs(scaled)) / np.max(a))


def convergence_order(errors: ArrayLike) -> NDArray[np.float64]:
    """步数逐次加倍时的观测收敛阶 log2(e_k / e_{k+1})。"""
    e = np.asarray(errors, dtype=np.float64)
    return np.asarray(np.log2(e[:-1] / e[1:]), dtype=np.float64)

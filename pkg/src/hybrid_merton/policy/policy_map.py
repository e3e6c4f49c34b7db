"""闭式价值函数与最优策略。

V(t,x,i) = A_i(t)^κ x^{1−κ}/(1−κ)，ĉ = x/A_i(t)，π̂ = (1/κ)(σ_iᵀ)⁻¹θ_i。
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from hybrid_merton.core.errors import DimensionMismatch, NonConcavePoint, NonPositiveWealth
from hybrid_merton.hjb_ode.grid import SolutionGrid, interpolate
from hybrid_merton.hjb_ode.solver import DEFAULT_STEPS, solve_backward
from hybrid_merton.hjb_ode.utility import UtilitySpec
from hybrid_merton.market.generator import check_regime
from hybrid_merton.market.market import (
    MarketPriceOfRisk,
    RegimeMarket,
    market_price_of_risk,
    solve_volatility,
)

logger = logging.getLogger(__name__)


class ValueDerivatives(NamedTuple):
    """价值函数及其偏导数（可为数组）。"""

    v: NDArray[np.float64]
    v_t: NDArray[np.float64]
    v_x: NDArray[np.float64]
    v_xx: NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class PolicyMap:
    """闭式策略映射。

    Attributes:
        grid: A_i(t) 解网格
        mkt: 市场
        util: 效用
        theta: 市场风险价格
    """

    grid: SolutionGrid
    mkt: RegimeMarket
    util: UtilitySpec
    theta: MarketPriceOfRisk

    def __post_init__(self) -> None:
        size = self.mkt.n_regimes
        if self.grid.n_regimes != size or self.theta.theta.shape[0] != size:
            raise DimensionMismatch("网格、市场与 θ 的体制数不一致")
        if self.theta.theta.shape[1] != self.mkt.n_assets:
            raise DimensionMismatch("θ 的维数与资产数不一致")
        if not np.isclose(self.grid.horizon, self.mkt.horizon, rtol=1e-12, atol=0.0):
            raise DimensionMismatch(
                f"网格期限 {self.grid.horizon} 与市场期限 {self.mkt.horizon} 不一致"
            )

    @property
    def horizon(self) -> float:
        return self.mkt.horizon

    def derivatives(self, t: ArrayLike, x: ArrayLike, regimes: ArrayLike) -> ValueDerivatives:
        """逐点计算 V、V_t、V_x、V_xx（t、x、regimes 广播）。"""
        ts, xs, rs = np.broadcast_arrays(
            np.asarray(t, dtype=np.float64), np.asarray(x, dtype=np.float64), np.asarray(regimes)
        )
        if np.any(xs <= 0.0):
            raise NonPositiveWealth(float(xs[xs <= 0.0].flat[0]))
        kappa = self.util.kappa
        a = self.grid.evaluate(ts, rs)
        slope = np.take_along_axis(
            self.grid.derivative_all(ts), rs[..., None].astype(np.intp), axis=-1
        )[..., 0]
        x_pow = np.power(xs, 1.0 - kappa)
        a_pow = np.power(a, kappa)
        v = a_pow * x_pow / (1.0 - kappa)
        v_t = kappa * np.power(a, kappa - 1.0) * slope * x_pow / (1.0 - kappa)
        v_x = a_pow * np.power(xs, -kappa)
        v_xx = -kappa * a_pow * np.power(xs, -kappa - 1.0)
        return ValueDerivatives(v=v, v_t=v_t, v_x=v_x, v_xx=v_xx)


def build_policy_map(
    mkt: RegimeMarket, util: UtilitySpec, steps: int = DEFAULT_STEPS
) -> PolicyMap:
    """求解 ODE 并组装 PolicyMap。"""
    grid = solve_backward(mkt, util, steps)
    return PolicyMap(grid=grid, mkt=mkt, util=util, theta=market_price_of_risk(mkt))


def _check_wealth(x: float) -> float:
    if not np.isfinite(x) or x <= 0.0:
        raise NonPositiveWealth(x)
    return float(x)


def value(pm: PolicyMap, t: float, x: float, i: int) -> float:
    """V(t,x,i) = A_i(t)^κ x^{1−κ}/(1−κ)；κ > 1 时为负，κ < 1 时为正。"""
    x = _check_wealth(x)
    kappa = pm.util.kappa
    a = interpolate(pm.grid, t, i)
    return float(a**kappa * x ** (1.0 - kappa) / (1.0 - kappa))


def value_derivatives(pm: PolicyMap, t: float, x: float, i: int) -> ValueDerivatives:
    """单点的 (V, V_t, V_x, V_xx)。"""
    x = _check_wealth(x)
    i = check_regime(i, pm.mkt.n_regimes)
    return pm.derivatives(t, x, i)


def optimal_consumption(pm: PolicyMap, t: float, x: float, i: int) -> float:
    """最优消费率 ĉ = x / A_i(t)，关于财富线性。"""
    x = _check_wealth(x)
    return x / interpolate(pm.grid, t, i)


def optimal_portfolio(pm: PolicyMap, t: float, i: int) -> NDArray[np.float64]:
    """最优投资比例 π̂ = (1/κ)(σ_iᵀ)⁻¹θ_i，与 t、x 无关。

    Raises:
        SingularVolatility: σ_i 数值奇异
    """
    i = check_regime(i, pm.mkt.n_regimes)
    interpolate(pm.grid, t, i)  # 只做范围校验
    return solve_volatility(pm.mkt, i, pm.theta[i], transpose=True) / pm.util.kappa


def general_policy_from_value(
    vx: float,
    vxx: float,
    t: float,
    x: float,
    i: int,
    mkt: RegimeMarket,
    util: UtilitySpec,
) -> tuple[float, NDArray[np.float64]]:
    """一般价值函数导数下的最优反馈策略。

    c = Ψ(V_x) = V_x^{−1/κ}，π = −(V_x/(x V_xx))(σ_iᵀ)⁻¹θ_i。

    Raises:
        ValueError: V_x ≤ 0
        NonConcavePoint: V_xx ≥ 0
    """
    x = _check_wealth(x)
    if not vx > 0.0:
        raise ValueError(f"V_x 必须为正，得到 {vx}")
    if not vxx < 0.0:
        raise NonConcavePoint(vxx)
    i = check_regime(i, mkt.n_regimes)
    coeffs = mkt.coefficients_at(t, i)
    theta = solve_volatility(mkt, i, coeffs.alpha - coeffs.r)
    direction = solve_volatility(mkt, i, theta, transpose=True)
    c = float(util.inverse_marginal(vx))
    return c, -(vx / (x * vxx)) * direction


def certainty_equivalent(pm: PolicyMap, t: float, x: float, i: int) -> float:
    """确定性等价财富 z：U(z) = V(t,x,i)，即 z = A_i(t)^{κ/(1−κ)} x。"""
    x = _check_wealth(x)
    kappa = pm.util.kappa
    return float(interpolate(pm.grid, t, i) ** (kappa / (1.0 - kappa)) * x)

"""体制切换市场。

定义各体制下的无风险利率 r_i、期望收益 α_i、随机波动率 σ_i 和不确定波动率 η_i，
并派生市场风险价格 θ_i 与 Gram 矩阵 Λ_i = σ_i σ_iᵀ。
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from hybrid_merton.core.errors import (
    DimensionMismatch,
    NonFiniteCoefficient,
    NotPositiveDefinite,
    SingularVolatility,
)
from hybrid_merton.market.generator import Generator, check_regime

logger = logging.getLogger(__name__)

# 相对于机器精度的条件数上限，超过即视为奇异
_COND_LIMIT = 1.0 / np.finfo(np.float64).eps


class RegimeCoefficients(NamedTuple):
    """单个体制在某一时刻的市场系数。"""

    r: float
    alpha: NDArray[np.float64]
    sigma: NDArray[np.float64]
    eta: NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class RegimeMarket:
    """体制切换市场。

    构造时校验维度一致、系数有限、每个体制的 Λ_i 正定。构造后不可变。

    Attributes:
        generator: 体制链生成元
        r: 形状 (S,) 的无风险利率
        alpha: 形状 (S, m) 的期望收益
        sigma: 形状 (S, m, m) 的随机波动率矩阵
        eta: 形状 (S, m, n) 的不确定波动率矩阵
        horizon: 投资期限 T
    """

    generator: Generator
    r: NDArray[np.float64]
    alpha: NDArray[np.float64]
    sigma: NDArray[np.float64]
    eta: NDArray[np.float64]
    horizon: float

    def __post_init__(self) -> None:
        size = self.generator.n_regimes
        r = _as_array(self.r, "r").reshape(-1)
        alpha = _as_array(self.alpha, "alpha")
        sigma = _as_array(self.sigma, "sigma")
        eta = _as_array(self.eta, "eta")

        if r.shape != (size,):
            raise DimensionMismatch(f"r 需要 {size} 个体制的取值，得到形状 {r.shape}")
        if alpha.ndim != 2 or alpha.shape[0] != size:
            raise DimensionMismatch(f"alpha 形状应为 (S, m)，得到 {alpha.shape}")
        m = alpha.shape[1]
        if sigma.shape != (size, m, m):
            raise DimensionMismatch(f"sigma 形状应为 {(size, m, m)}，得到 {sigma.shape}")
        if eta.ndim != 3 or eta.shape[:2] != (size, m) or eta.shape[2] < 1:
            raise DimensionMismatch(f"eta 形状应为 ({size}, {m}, n)，得到 {eta.shape}")
        if not np.isfinite(self.horizon) or self.horizon <= 0.0:
            raise NonFiniteCoefficient(f"期限 T 必须为有限正数，得到 {self.horizon}")

        for i in range(size):
            try:
                np.linalg.cholesky(_gram(sigma[i]))
            except np.linalg.LinAlgError as e:
                raise NotPositiveDefinite(i) from e

        for name, arr in (("r", r), ("alpha", alpha), ("sigma", sigma), ("eta", eta)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "horizon", float(self.horizon))
        logger.debug("市场校验通过: S=%d, m=%d, n=%d, T=%g", size, m, eta.shape[2], self.horizon)

    @classmethod
    def from_scalars(
        cls,
        generator: Generator,
        r: Sequence[float],
        alpha: Sequence[float],
        sigma: Sequence[float],
        eta: Sequence[float],
        horizon: float,
    ) -> "RegimeMarket":
        """由逐体制标量系数构造单资产、一维典范过程的市场（m = n = 1）。"""
        size = generator.n_regimes
        return cls(
            generator=generator,
            r=np.asarray(r, dtype=np.float64),
            alpha=np.asarray(alpha, dtype=np.float64).reshape(size, 1),
            sigma=np.asarray(sigma, dtype=np.float64).reshape(size, 1, 1),
            eta=np.asarray(eta, dtype=np.float64).reshape(size, 1, 1),
            horizon=horizon,
        )

    @property
    def n_regimes(self) -> int:
        """体制数 S。"""
        return self.generator.n_regimes

    @property
    def n_assets(self) -> int:
        """风险资产数 m。"""
        return int(self.alpha.shape[1])

    @property
    def n_canonical(self) -> int:
        """典范过程维数 n。"""
        return int(self.eta.shape[2])

    @property
    def lambdas(self) -> NDArray[np.float64]:
        """离开速率 λ_i。"""
        return self.generator.lambdas

    @property
    def has_uncertain_volatility(self) -> bool:
        """是否存在非零的不确定波动率 η。"""
        return bool(np.any(self.eta != 0.0))

    def coefficients_at(self, t: float, i: int) -> RegimeCoefficients:
        """体制 i 在时刻 t 的系数。

        时变系数的扩展点；当前系数在每个体制内为常数，t 不参与计算。
        """
        i = check_regime(i, self.n_regimes)
        return RegimeCoefficients(
            r=float(self.r[i]), alpha=self.alpha[i], sigma=self.sigma[i], eta=self.eta[i]
        )


@dataclass(frozen=True, eq=False)
class MarketPriceOfRisk:
    """各体制的市场风险价格 θ_i = σ_i⁻¹(α_i − r_i·1)。

    Attributes:
        theta: 形状 (S, m)
    """

    theta: NDArray[np.float64]

    def __getitem__(self, i: int) -> NDArray[np.float64]:
        return self.theta[check_regime(i, self.theta.shape[0])]

    def squared_norms(self) -> NDArray[np.float64]:
        """|θ_i|²，形状 (S,)。"""
        return np.asarray(np.sum(self.theta**2, axis=1), dtype=np.float64)


def _as_array(value: ArrayLike, name: str) -> NDArray[np.float64]:
    try:
        arr = np.array(value, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise DimensionMismatch(f"{name} 不是数值数组: {e}") from e
    if not np.all(np.isfinite(arr)):
        raise NonFiniteCoefficient(f"{name} 含非有限元素")
    return arr


def _gram(sigma: NDArray[np.float64]) -> NDArray[np.float64]:
    gram = sigma @ sigma.T
    return np.asarray(0.5 * (gram + gram.T), dtype=np.float64)


def gram_matrix(mkt: RegimeMarket, i: int) -> NDArray[np.float64]:
    """体制 i 的 Λ_i = σ_i σ_iᵀ（对称正定）。"""
    i = check_regime(i, mkt.n_regimes)
    return _gram(mkt.sigma[i])


def solve_volatility(
    mkt: RegimeMarket, i: int, rhs: NDArray[np.float64], transpose: bool = False
) -> NDArray[np.float64]:
    """求解 σ_i y = rhs（transpose=True 时求解 σ_iᵀ y = rhs）。

    使用线性求解而非显式求逆。

    Raises:
        SingularVolatility: σ_i 数值奇异
    """
    i = check_regime(i, mkt.n_regimes)
    matrix = mkt.sigma[i].T if transpose else mkt.sigma[i]
    if np.linalg.cond(matrix) > _COND_LIMIT:
        raise SingularVolatility(i)
    try:
        return np.asarray(np.linalg.solve(matrix, rhs), dtype=np.float64)
    except np.linalg.LinAlgError as e:
        raise SingularVolatility(i) from e


def market_price_of_risk(mkt: RegimeMarket) -> MarketPriceOfRisk:
    """计算各体制的市场风险价格 θ_i。

    θ_i 满足 σ_i θ_i = α_i − r_i·1。

    Raises:
        SingularVolatility: 某个 σ_i 数值奇异
    """
    theta = np.empty((mkt.n_regimes, mkt.n_assets))
    for i in range(mkt.n_regimes):
        excess = mkt.alpha[i] - mkt.r[i]
        theta[i] = solve_volatility(mkt, i, excess)
    theta.setflags(write=False)
    return MarketPriceOfRisk(theta=theta)


def good_economy(mkt: RegimeMarket) -> int:
    """推断"好经济"体制：无风险利率最高，其次 Λ 的迹最小。"""
    traces = np.array([np.trace(gram_matrix(mkt, i)) for i in range(mkt.n_regimes)])
    order = np.lexsort((traces, -mkt.r))
    return int(order[0])

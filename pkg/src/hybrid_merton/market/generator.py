"""马尔可夫链生成元。

提供生成元 Q 的校验，以及平稳分布、转移矩阵、期望占用时间等派生量。
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import expm
from scipy.sparse.csgraph import connected_components

from hybrid_merton.core.errors import (
    DimensionMismatch,
    NegativeOffDiagonal,
    NonFiniteCoefficient,
    NonZeroRowSum,
    Reducible,
    RegimeIndexError,
)

logger = logging.getLogger(__name__)

ROW_SUM_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class Generator:
    """已校验的生成元。

    通过 :func:`validate_generator` 构造；q 为只读数组。

    Attributes:
        q: S×S 转移速率矩阵（1/时间）
    """

    q: NDArray[np.float64]

    @property
    def n_regimes(self) -> int:
        """体制数 S。"""
        return int(self.q.shape[0])

    @property
    def lambdas(self) -> NDArray[np.float64]:
        """离开各体制的速率 λ_i = −q_ii。"""
        return -np.diag(self.q).copy()

    def rate(self, i: int) -> float:
        """体制 i 的离开速率 λ_i。"""
        check_regime(i, self.n_regimes)
        return float(-self.q[i, i])

    def jump_probabilities(self, i: int) -> NDArray[np.float64]:
        """从体制 i 跳出时的目标分布 q_ij / λ_i（j ≠ i）。

        λ_i = 0 时返回全零向量。
        """
        check_regime(i, self.n_regimes)
        row = self.q[i].copy()
        row[i] = 0.0
        lam = row.sum()
        if lam <= 0.0:
            return np.zeros_like(row)
        return row / lam

    def to_list(self) -> list[list[float]]:
        """转换为嵌套列表（用于序列化）。"""
        return [[float(v) for v in row] for row in self.q]


def check_regime(i: object, n_regimes: int) -> int:
    """校验体制编号（内部从 0 计数）。

    Returns:
        规范化后的整数编号

    Raises:
        RegimeIndexError: 编号不是整数或越界
    """
    if isinstance(i, (bool, np.bool_)) or not isinstance(i, (int, np.integer)):
        raise RegimeIndexError(i, n_regimes)
    if not 0 <= int(i) < n_regimes:
        raise RegimeIndexError(i, n_regimes)
    return int(i)


def validate_generator(q: ArrayLike) -> Generator:
    """校验并构造生成元。

    条件：方阵、元素有限、各行和为零（相对容差 1e-12·max|q|）、
    非对角元非负，S ≥ 2 时以正非对角元构成的有向图强连通。

    Args:
        q: S×S 矩阵

    Returns:
        Generator

    Raises:
        DimensionMismatch: 不是非空方阵
        NonFiniteCoefficient: 含 NaN/Inf
        NonZeroRowSum: 某行之和不为零
        NegativeOffDiagonal: 非对角元为负
        Reducible: 链不可约条件不满足
    """
    arr = np.array(q, dtype=np.float64, ndmin=2)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionMismatch(f"生成元必须是非空方阵，得到形状 {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteCoefficient("生成元含非有限元素")

    size = arr.shape[0]
    scale = float(np.max(np.abs(arr)))
    tol = ROW_SUM_RTOL * scale
    sums = arr.sum(axis=1)
    for row, total in enumerate(sums):
        if abs(total) > tol:
            raise NonZeroRowSum(row, float(total))

    off = arr.copy()
    np.fill_diagonal(off, 0.0)
    negative = np.argwhere(off < 0.0)
    if negative.size:
        row, col = (int(v) for v in negative[0])
        raise NegativeOffDiagonal(row, col, float(arr[row, col]))

    if size >= 2:
        n_classes, _ = connected_components(off > 0.0, directed=True, connection="strong")
        if n_classes != 1:
            raise Reducible(int(n_classes))

    arr.setflags(write=False)
    logger.debug("生成元校验通过: S=%d, λ=%s", size, -np.diag(arr))
    return Generator(q=arr)


def stationary_distribution(gen: Generator) -> NDArray[np.float64]:
    """平稳分布 π：πQ = 0，Σπ = 1。

    用最小二乘求解叠加了归一化约束的方程组。
    """
    size = gen.n_regimes
    system = np.vstack([gen.q.T, np.ones(size)])
    rhs = np.zeros(size + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    return np.asarray(pi, dtype=np.float64)


def transition_matrix(gen: Generator, dt: float) -> NDArray[np.float64]:
    """区间 dt 上的转移概率矩阵 P(dt) = exp(Q·dt)。"""
    return np.asarray(expm(gen.q * dt), dtype=np.float64)


def expected_occupation(gen: Generator, i0: int, horizon: float) -> NDArray[np.float64]:
    """从 i0 出发，[0, T] 内各体制的期望占用比例。

    (1/T)·∫₀ᵀ exp(Qs) ds 的第 i0 行，由分块矩阵指数
    exp([[Q, I], [0, 0]]·T) 的右上块得到。

    Args:
        gen: 生成元
        i0: 初始体制
        horizon: 时间长度 T > 0

    Returns:
        长度 S 的占用比例向量，和为 1
    """
    i0 = check_regime(i0, gen.n_regimes)
    if horizon <= 0.0:
        raise ValueError("horizon 必须为正")
    size = gen.n_regimes
    block = np.zeros((2 * size, 2 * size))
    block[:size, :size] = gen.q
    block[:size, size:] = np.eye(size)
    integral = expm(block * horizon)[:size, size:]
    return np.asarray(integral[i0] / horizon, dtype=np.float64)

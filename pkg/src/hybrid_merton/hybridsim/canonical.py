"""典范过程的 α-路径与单位区间上的 Gauss-Legendre 求积。

典范过程 C_t 服从正态不确定分布，其逆分布为

    Φ_t⁻¹(α) = (√3·t/π)·ln(α/(1−α))，

固定分位水平 α 得到一条确定的 Lipschitz 路径（α-路径）。
"""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from hybrid_merton.core.errors import DegenerateQuantile

LIU_SCALE = np.sqrt(3.0) / np.pi


def _check_alpha(alpha: ArrayLike) -> NDArray[np.float64]:
    a = np.asarray(alpha, dtype=np.float64)
    bad = ~((a > 0.0) & (a < 1.0))
    if np.any(bad):
        raise DegenerateQuantile(float(np.atleast_1d(a)[np.atleast_1d(bad)][0]))
    return a


def alpha_slope(alpha: ArrayLike) -> NDArray[np.float64]:
    """α-路径的斜率 (√3/π)·ln(α/(1−α))（即单位时间增量）。"""
    a = _check_alpha(alpha)
    return np.asarray(LIU_SCALE * np.log(a / (1.0 - a)), dtype=np.float64)


def canonical_quantile(alpha: ArrayLike, t: ArrayLike) -> NDArray[np.float64]:
    """C_t 的 α 分位数 Φ_t⁻¹(α)。"""
    return np.asarray(alpha_slope(alpha) * np.asarray(t, dtype=np.float64), dtype=np.float64)


def canonical_alpha_path(
    alpha: float, times: ArrayLike
) -> NDArray[np.float64]:
    """在给定时间网格上取值的 α-路径 C_t^α。

    Raises:
        DegenerateQuantile: α 不在 (0, 1) 内
    """
    slope = float(alpha_slope(alpha))
    return np.asarray(slope * np.asarray(times, dtype=np.float64), dtype=np.float64)


def gauss_legendre_unit(n: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """(0, 1) 上的 n 点 Gauss-Legendre 节点与权重（权重和为 1）。"""
    if n < 1:
        raise ValueError(f"节点数必须为正，得到 {n}")
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


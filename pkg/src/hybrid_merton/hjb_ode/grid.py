"""A_i(t) 的时间网格与三次 Hermite 插值。"""

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import CubicHermiteSpline

from hybrid_merton.core.errors import DimensionMismatch, NonFinite, OutOfRange
from hybrid_merton.market.generator import check_regime

# 判定 t 落在 [0, T] 内时允许的相对越界
_RANGE_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class SolutionGrid:
    """前向时间顺序的解网格。

    Attributes:
        times: 升序网格 t_0 = 0, ..., t_N = T
        values: 形状 (N+1, S) 的 A_i(t_k)
        derivatives: 形状 (N+1, S) 的 A_i'(t_k)，取自 ODE 右端
    """

    times: NDArray[np.float64]
    values: NDArray[np.float64]
    derivatives: NDArray[np.float64]
    _spline: Any = field(init=False, repr=False)
    _slope: Any = field(init=False, repr=False)

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=np.float64)
        values = np.array(self.values, dtype=np.float64)
        derivatives = np.array(self.derivatives, dtype=np.float64)
        if times.ndim != 1 or times.size < 2:
            raise DimensionMismatch("网格至少需要两个节点")
        if values.ndim != 2 or values.shape[0] != times.size:
            raise DimensionMismatch(f"values 形状 {values.shape} 与网格长度 {times.size} 不符")
        if derivatives.shape != values.shape:
            raise DimensionMismatch("derivatives 与 values 形状不一致")
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(derivatives))):
            raise NonFinite(float(times[-1]))
        if np.any(np.diff(times) <= 0.0):
            raise DimensionMismatch("网格时间必须严格递增")

        for name, arr in (("times", times), ("values", values), ("derivatives", derivatives)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        spline = CubicHermiteSpline(times, values, derivatives, axis=0)
        object.__setattr__(self, "_spline", spline)
        object.__setattr__(self, "_slope", spline.derivative())

    @property
    def horizon(self) -> float:
        """期限 T。"""
        return float(self.times[-1])

    @property
    def step(self) -> float:
        """网格步长（均匀网格）。"""
        return float(self.times[1] - self.times[0])

    @property
    def n_regimes(self) -> int:
        """体制数 S。"""
        return int(self.values.shape[1])

    def _flat_times(self, t: ArrayLike) -> NDArray[np.float64]:
        ts = np.atleast_1d(np.asarray(t, dtype=np.float64)).reshape(-1)
        slack = _RANGE_SLACK * self.horizon
        bad = (ts < -slack) | (ts > self.horizon + slack) | ~np.isfinite(ts)
        if np.any(bad):
            raise OutOfRange(float(ts[bad][0]), self.horizon)
        return np.asarray(np.clip(ts, 0.0, self.horizon), dtype=np.float64)

    def _lookup(self, t: ArrayLike, curve: Any, stored: NDArray[np.float64]) -> NDArray[np.float64]:
        shape = np.shape(t)
        ts = self._flat_times(t)
        out = np.asarray(curve(ts), dtype=np.float64)
        idx = np.clip(np.searchsorted(self.times, ts), 0, self.times.size - 1)
        exact = self.times[idx] == ts
        out[exact] = stored[idx[exact]]
        return out.reshape(shape + (self.n_regimes,))

    def evaluate_all(self, t: ArrayLike) -> NDArray[np.float64]:
        """所有体制在 t 处的插值，形状 t.shape + (S,)。节点处精确返回存储值。"""
        return self._lookup(t, self._spline, self.values)

    def evaluate(self, t: ArrayLike, regimes: ArrayLike) -> NDArray[np.float64]:
        """逐点取 A_{regimes}(t)，t 与 regimes 广播。"""
        ts, rs = np.broadcast_arrays(np.asarray(t, dtype=np.float64), np.asarray(regimes))
        table = self.evaluate_all(ts)
        picked = np.take_along_axis(table, rs[..., None].astype(np.intp), axis=-1)
        return np.asarray(picked[..., 0], dtype=np.float64)

    def derivative_all(self, t: ArrayLike) -> NDArray[np.float64]:
        """所有体制在 t 处的 A_i'(t)，节点处精确返回存储的 ODE 导数。"""
        return self._lookup(t, self._slope, self.derivatives)

    def derivative(self, t: float, i: int) -> float:
        """A_i'(t)。"""
        i = check_regime(i, self.n_regimes)
        return float(self.derivative_all(t)[i])

    def perturbed(self, i: int, factor: float) -> "SolutionGrid":
        """把 A_i 的取值乘以 factor，导数保持不变（用于检验残差检查器）。"""
        i = check_regime(i, self.n_regimes)
        values = np.array(self.values)
        values[:, i] *= factor
        return SolutionGrid(times=self.times, values=values, derivatives=self.derivatives)


def interpolate(grid: SolutionGrid, t: float, i: int) -> float:
    """A_i(t) 的三次 Hermite 插值。

    使用存储值及 ODE 给出的导数，节点处精确。

    Raises:
        OutOfRange: t 不在 [0, T]
        RegimeIndexError: 体制编号越界
    """
    i = check_regime(i, grid.n_regimes)
    return float(grid.evaluate_all(t)[i])


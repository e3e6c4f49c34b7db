"""CRRA 效用。"""

from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.typing import NDArray

from hybrid_merton.core.errors import InvalidUtility

FloatOrArray = Union[float, NDArray[np.float64]]

# κ 与 1 的最小距离；κ = 1 为对数效用，不在本模型范围内
KAPPA_ONE_GAP = 1e-9


@dataclass(frozen=True)
class UtilitySpec:
    """消费与终端财富共用的 CRRA 效用 U(z) = z^{1−κ}/(1−κ)。

    Attributes:
        kappa: 相对风险厌恶系数 κ > 0，κ ≠ 1
        beta: 效用贴现率 β ≥ 0
    """

    kappa: float
    beta: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.kappa) or self.kappa <= 0.0:
            raise InvalidUtility(f"κ 必须为正，得到 {self.kappa}")
        if abs(self.kappa - 1.0) <= KAPPA_ONE_GAP:
            raise InvalidUtility("κ = 1（对数效用）不受支持")
        if not np.isfinite(self.beta) or self.beta < 0.0:
            raise InvalidUtility(f"β 必须非负，得到 {self.beta}")

    def utility(self, z: FloatOrArray) -> FloatOrArray:
        """U(z) = z^{1−κ}/(1−κ)。"""
        return np.power(z, 1.0 - self.kappa) / (1.0 - self.kappa)

    def marginal(self, z: FloatOrArray) -> FloatOrArray:
        """U'(z) = z^{−κ}。"""
        return np.power(z, -self.kappa)

    def inverse_marginal(self, y: FloatOrArray) -> FloatOrArray:
        """Ψ(y) = y^{−1/κ}，U' 的反函数。"""
        return np.power(y, -1.0 / self.kappa)

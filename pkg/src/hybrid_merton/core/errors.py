"""错误类型定义。

所有异常都派生自 HybridMertonError，分为两类：

- ValidationError：输入（配置、市场系数、查询参数）不合法，CLI 退出码 1
- NumericalError：数值计算过程失败，CLI 退出码 2
"""

from typing import Any, Optional


class HybridMertonError(Exception):
    """hybrid-merton 所有错误的基类。"""

    exit_code: int = 2


class ValidationError(HybridMertonError):
    """输入校验错误。"""

    exit_code = 1


class NumericalError(HybridMertonError):
    """数值计算错误。"""

    exit_code = 2


class VerificationFailed(HybridMertonError):
    """验证套件中至少一项检查未通过。"""

    exit_code = 3

    def __init__(self, failed: list[str]) -> None:
        self.failed = list(failed)
        super().__init__(f"验证失败: {', '.join(self.failed)}")


# ============ 配置 ============
class ConfigError(ValidationError):
    """配置文件错误。

    Attributes:
        path: 配置文件路径
        field: 出错字段（点分路径，如 market.regimes[1].sigma）
        line: 出错行号（YAML 语法错误时可用）
    """

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        field: Optional[str] = None,
        line: Optional[int] = None,
    ) -> None:
        self.path = path
        self.field = field
        self.line = line
        self.message = message
        super().__init__(self._format())

    def _format(self) -> str:
        where = []
        if self.path:
            where.append(str(self.path))
        if self.line is not None:
            where.append(f"第 {self.line} 行")
        if self.field:
            where.append(f"字段 {self.field}")
        if not where:
            return self.message
        return f"{', '.join(where)}: {self.message}"


# ============ 市场 ============
class NonZeroRowSum(ValidationError):
    """生成元某行之和不为零。"""

    def __init__(self, row: int, total: float) -> None:
        self.row = row
        self.total = total
        super().__init__(f"生成元第 {row + 1} 行之和为 {total:.3e}，应为 0")


class NegativeOffDiagonal(ValidationError):
    """生成元存在负的非对角元。"""

    def __init__(self, row: int, col: int, value: float) -> None:
        self.row = row
        self.col = col
        self.value = value
        super().__init__(f"生成元 q[{row + 1},{col + 1}] = {value} < 0")


class Reducible(ValidationError):
    """马尔可夫链不是不可约的。"""

    def __init__(self, n_classes: int) -> None:
        self.n_classes = n_classes
        super().__init__(f"生成元可约：存在 {n_classes} 个强连通类")


class NotPositiveDefinite(ValidationError):
    """某体制的 Λ_i = σ_i σ_iᵀ 不是正定矩阵。"""

    def __init__(self, regime: int) -> None:
        self.regime = regime
        super().__init__(f"体制 {regime + 1} 的 σσᵀ 不是正定矩阵")


class DimensionMismatch(ValidationError):
    """维度不一致。"""


class NonFiniteCoefficient(ValidationError):
    """系数中含 NaN 或 Inf。"""


class InvalidUtility(ValidationError):
    """效用参数不合法（κ ≤ 0、κ = 1 或 β < 0）。"""


class RegimeIndexError(ValidationError, IndexError):
    """体制编号越界。"""

    def __init__(self, regime: Any, n_regimes: int) -> None:
        self.regime = regime
        self.n_regimes = n_regimes
        super().__init__(f"体制编号 {regime} 越界（共 {n_regimes} 个体制，内部从 0 计数）")


class OutOfRange(ValidationError):
    """时间超出 [0, T]。"""

    def __init__(self, t: float, horizon: float) -> None:
        self.t = t
        self.horizon = horizon
        super().__init__(f"时间 t = {t} 超出 [0, {horizon}]")


class NonPositiveWealth(ValidationError):
    """财富必须为正。"""

    def __init__(self, x: Any) -> None:
        self.x = x
        super().__init__(f"财富必须为正，得到 {x}")


class DegenerateQuantile(ValidationError):
    """α 分位数必须在 (0, 1) 内。"""

    def __init__(self, alpha: Any) -> None:
        self.alpha = alpha
        super().__init__(f"分位数 α = {alpha} 不在 (0, 1) 内")


# ============ 数值 ============
class SingularVolatility(NumericalError):
    """波动率矩阵数值奇异。"""

    def __init__(self, regime: int) -> None:
        self.regime = regime
        super().__init__(f"体制 {regime + 1} 的波动率矩阵 σ 数值奇异")


class NonPositiveA(NumericalError):
    """ODE 解 A_i 不再为正，CRRA 假设失效。"""

    def __init__(self, t: float, regime: int, value: float) -> None:
        self.t = t
        self.regime = regime
        self.value = value
        super().__init__(f"t = {t:.6g} 处 A_{regime + 1} = {value:.6g} ≤ 0，终止积分")


class NonFinite(NumericalError):
    """ODE 积分出现溢出或 NaN。"""

    def __init__(self, t: float) -> None:
        self.t = t
        super().__init__(f"t = {t:.6g} 处积分出现非有限值")


class NonFiniteState(NumericalError):
    """模拟状态出现非有限值。"""

    def __init__(self, t: float, count: int) -> None:
        self.t = t
        self.count = count
        super().__init__(f"t = {t:.6g} 处有 {count} 条路径状态非有限")


class NonConcavePoint(NumericalError):
    """值函数在该点不是严格凹的（V_xx ≥ 0）。"""

    def __init__(self, vxx: float) -> None:
        self.vxx = vxx
        super().__init__(f"V_xx = {vxx} ≥ 0，无法取得二次最大化")


class TooManyRejectedPaths(NumericalError):
    """财富非正而被拒绝的路径过多。"""

    def __init__(self, rejected: int, total: int, limit: float) -> None:
        self.rejected = rejected
        self.total = total
        self.limit = limit
        super().__init__(
            f"{rejected}/{total} 条路径财富触及非正值，超过上限 {limit:.2%}"
        )

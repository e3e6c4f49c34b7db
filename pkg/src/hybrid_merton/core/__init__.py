"""核心包初始化。

导出错误类型与日志配置。
"""

from hybrid_merton.core.errors import (
    ConfigError,
    DegenerateQuantile,
    DimensionMismatch,
    HybridMertonError,
    InvalidUtility,
    NegativeOffDiagonal,
    NonConcavePoint,
    NonFinite,
    NonFiniteCoefficient,
    NonFiniteState,
    NonPositiveA,
    NonPositiveWealth,
    NonZeroRowSum,
    NotPositiveDefinite,
    NumericalError,
    OutOfRange,
    Reducible,
    RegimeIndexError,
    SingularVolatility,
    TooManyRejectedPaths,
    ValidationError,
    VerificationFailed,
)
from hybrid_merton.core.logging import configure_logging

__all__ = [
    "HybridMertonError",
    "ValidationError",
    "NumericalError",
    "VerificationFailed",
    "ConfigError",
    "NonZeroRowSum",
    "NegativeOffDiagonal",
    "Reducible",
    "NotPositiveDefinite",
    "DimensionMismatch",
    "NonFiniteCoefficient",
    "InvalidUtility",
    "RegimeIndexError",
    "OutOfRange",
    "NonPositiveWealth",
    "DegenerateQuantile",
    "SingularVolatility",
    "NonPositiveA",
    "NonFinite",
    "NonFiniteState",
    "NonConcavePoint",
    "TooManyRejectedPaths",
    "configure_logging",
]

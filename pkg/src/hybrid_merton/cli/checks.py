"""验证检查的基础类型与注册表。

提供检查结果类型以及检查项的注册、查找和执行。
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Optional

from hybrid_merton.core.errors import NumericalError

logger = logging.getLogger(__name__)


class CheckStatus(Enum):
    """检查状态枚举。"""

    PASS = "pass"
    FAIL = "fail"
    EXPLORATORY = "exploratory"  # 只记录，不参与判定
    ERROR = "error"


@dataclass
class CheckResult:
    """单项检查结果。

    Attributes:
        check: 检查名称
        passed: 是否通过
        metric: 度量值
        tolerance: 容差
        status: 状态
        details: 附加信息
    """

    check: str
    passed: bool
    metric: float
    tolerance: float
    status: CheckStatus = CheckStatus.PASS
    details: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def compare(
        cls, check: str, metric: float, tolerance: float, **details: Any
    ) -> "CheckResult":
        """metric ≤ tolerance 时通过。"""
        passed = bool(metric <= tolerance)
        return cls(
            check=check,
            passed=passed,
            metric=float(metric),
            tolerance=float(tolerance),
            status=CheckStatus.PASS if passed else CheckStatus.FAIL,
            details=details,
        )

    def to_dict(self) -> dict[str, Any]:
        """转换为字典格式。"""
        return {
            "check": self.check,
            "pass": self.passed,
            "metric": self.metric,
            "tolerance": self.tolerance,
            "status": self.status.value,
            "details": self.details,
        }


CheckFunction = Callable[[Any], CheckResult]


@dataclass(frozen=True)
class CheckEntry:
    name: str
    description: str
    function: CheckFunction


class CheckError(Exception):
    """检查注册相关错误。"""


class CheckRegistry:
    """检查注册表。

    按注册顺序管理所有验证检查。
    """

    _checks: dict[str, CheckEntry] = {}

    @classmethod
    def register(cls, name: str, function: CheckFunction, description: str = "") -> None:
        """注册检查。

        Args:
            name: 检查名称（唯一标识）
            function: 检查函数，接收上下文返回 CheckResult
            description: 说明

        Raises:
            CheckError: 名称已注册
        """
        if name in cls._checks:
            raise CheckError(f"检查 '{name}' 已注册")
        cls._checks[name] = CheckEntry(name=name, description=description, function=function)

    @classmethod
    def check(cls, name: str, description: str = "") -> Callable[[CheckFunction], CheckFunction]:
        """装饰器形式的注册。"""

        def decorator(function: CheckFunction) -> CheckFunction:
            cls.register(name, function, description)
            return function

        return decorator

    @classmethod
    def unregister(cls, name: str) -> None:
        """注销检查。"""
        cls._checks.pop(name, None)

    @classmethod
    def get(cls, name: str) -> CheckEntry:
        """获取检查。

        Raises:
            CheckError: 检查未找到
        """
        if name not in cls._checks:
            raise CheckError(f"检查 '{name}' 未找到")
        return cls._checks[name]

    @classmethod
    def has_check(cls, name: str) -> bool:
        return name in cls._checks

    @classmethod
    def list_checks(cls) -> list[str]:
        """按注册顺序列出检查名称。"""
        return list(cls._checks.keys())

    @classmethod
    def run(cls, context: Any, names: Optional[list[str]] = None) -> list[CheckResult]:
        """依次执行检查。

        单项检查中的数值错误记为 ERROR 结果，其余异常向上传播。

        Args:
            context: 检查上下文
            names: 要执行的检查（默认全部）

        Returns:
            检查结果列表
        """
        results = []
        for name in names or cls.list_checks():
            entry = cls.get(name)
            try:
                result = entry.function(context)
            except NumericalError as e:
                logger.error("检查 %s 出错: %s", name, e)
                result = CheckResult(
                    check=name,
                    passed=False,
                    metric=float("nan"),
                    tolerance=float("nan"),
                    status=CheckStatus.ERROR,
                    details={"error": str(e)},
                )
            logger.info(
                "检查 %s: %s (metric=%.3e, tol=%.3e)",
                name,
                result.status.value,
                result.metric,
                result.tolerance,
            )
            results.append(result)
        return results


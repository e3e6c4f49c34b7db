"""CLI 包初始化。

导出命令行接口相关类型。
"""

from hybrid_merton.cli.checks import CheckRegistry, CheckResult, CheckStatus
from hybrid_merton.cli.commands import create_parser, main

__all__ = [
    "main",
    "create_parser",
    "CheckRegistry",
    "CheckResult",
    "CheckStatus",
]

"""输出文件与终端表格。

CSV 采用固定的 12 位有效数字格式，保证相同配置与种子下逐字节一致。
"""

import json
import math
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from numpy.typing import ArrayLike
from rich.table import Table

from hybrid_merton.cli.checks import CheckResult, CheckStatus

CSV_FORMAT = "%.12g"

_STATUS_STYLE = {
    CheckStatus.PASS: "green",
    CheckStatus.FAIL: "red",
    CheckStatus.EXPLORATORY: "yellow",
    CheckStatus.ERROR: "bold red",
}


def write_csv(path: Path, header: Sequence[str], rows: ArrayLike) -> Path:
    """写出带表头的数值 CSV。"""
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        path,
        np.atleast_2d(np.asarray(rows, dtype=np.float64)),
        fmt=CSV_FORMAT,
        delimiter=",",
        header=",".join(header),
        comments="",
    )
    return path


def _finite(obj: Any) -> Any:
    """把非有限浮点数替换为 None，保证输出是合法 JSON。"""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, np.generic):
        return _finite(obj.item())
    return obj


def write_json(path: Path, payload: Any) -> Path:
    """写出 JSON 文件。"""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(_finite(payload), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    return path


def verify_table(results: list[CheckResult]) -> Table:
    """验证结果汇总表。"""
    table = Table(title="验证结果")
    table.add_column("检查", style="cyan")
    table.add_column("状态")
    table.add_column("度量", justify="right")
    table.add_column("容差", justify="right")
    for result in results:
        style = _STATUS_STYLE[result.status]
        table.add_row(
            result.check,
            f"[{style}]{result.status.value}[/{style}]",
            f"{result.metric:.3e}",
            f"{result.tolerance:.1e}",
        )
    return table


def solution_table(
    rho: Sequence[float],
    a0: Sequence[float],
    portfolio: Sequence[Sequence[float]],
) -> Table:
    """各体制的 ρ、A(0)、ĉ/x 与 π̂。"""
    table = Table(title="体制系数")
    table.add_column("体制", justify="right", style="cyan")
    table.add_column("ρ", justify="right")
    table.add_column("A(0)", justify="right")
    table.add_column("c/x (t=0)", justify="right")
    table.add_column("π̂", justify="right")
    for i, (r, a, pi) in enumerate(zip(rho, a0, portfolio)):
        table.add_row(
            str(i + 1),
            f"{r:.6f}",
            f"{a:.6f}",
            f"{1.0 / a:.6f}",
            ", ".join(f"{p:.4f}" for p in pi),
        )
    return table

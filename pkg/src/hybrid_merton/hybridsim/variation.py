"""Itô-Liu 乘法表的经验验证。

    dB^k dB^l = δ_kl dt,  dC dC = dC dt = dB dC = 0。

布朗二次变差在 [0,1] 上收敛到 1，误差为 O(√Δt)；α-路径是 Lipschitz 的，
其二次变差为 L²·Δt·T，随 Δt 线性趋于 0。
"""

import logging
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
from numpy.typing import NDArray

from hybrid_merton.hybridsim.canonical import alpha_slope, canonical_alpha_path
from hybrid_merton.hybridsim.parallel import block_rng, run_blocks
from hybrid_merton.hybridsim.sde import time_grid

logger = logging.getLogger(__name__)

MIN_GRID_STEPS = 100
VARIATION_BLOCK = 128
N_SIGMA = 3.0
SLOPE_TOLERANCE = 0.1


@dataclass(frozen=True)
class SampleMean:
    """样本均值及其标准误。"""

    mean: float
    std_error: float

    @classmethod
    def of(cls, values: NDArray[np.float64]) -> "SampleMean":
        n = values.size
        err = float(np.std(values, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        return cls(mean=float(np.mean(values)), std_error=err)

    def near(self, target: float, n_sigma: float = N_SIGMA) -> bool:
        return abs(self.mean - target) <= n_sigma * self.std_error

    def to_dict(self) -> dict[str, float]:
        return {"mean": self.mean, "std_error": self.std_error}


@dataclass(frozen=True)
class MeshVariation:
    """单一网格上的变差统计。

    Attributes:
        steps: 步数
        brownian_qv: Σ(ΔB¹)²
        brownian_qv_spread: 各路径 Σ(ΔB¹)² 的标准差，≈ √(2Δt)
        canonical_qv: Σ(ΔC^α)²（确定值）
        brownian_canonical: Σ ΔB¹·ΔC^α
        brownian_cross: Σ ΔB¹·ΔB²
    """

    steps: int
    brownian_qv: SampleMean
    brownian_qv_spread: float
    canonical_qv: float
    brownian_canonical: SampleMean
    brownian_cross: SampleMean

    def passed(self) -> bool:
        return (
            self.brownian_qv.near(1.0)
            and self.brownian_canonical.near(0.0)
            and self.brownian_cross.near(0.0)
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "steps": self.steps,
            "brownian_qv": self.brownian_qv.to_dict(),
            "brownian_qv_spread": self.brownian_qv_spread,
            "canonical_qv": self.canonical_qv,
            "brownian_canonical": self.brownian_canonical.to_dict(),
            "brownian_cross": self.brownian_cross.to_dict(),
        }


@dataclass(frozen=True)
class VariationReport:
    """两级网格上的乘法表验证结果。"""

    alpha: float
    meshes: tuple[MeshVariation, ...]

    @property
    def canonical_slope(self) -> float:
        """log-log 下典范二次变差对步数的斜率（应为 −1）；α = 0.5 时为 nan。"""
        coarse, fine = self.meshes[0], self.meshes[-1]
        if coarse.canonical_qv == 0.0 or fine.canonical_qv == 0.0:
            return float("nan")
        return float(
            np.log(fine.canonical_qv / coarse.canonical_qv) / np.log(fine.steps / coarse.steps)
        )

    @property
    def brownian_spread_ratio(self) -> float:
        """粗细网格上路径二次变差标准差之比，O(√Δt) 收敛时 ≈ √2。"""
        return self.meshes[0].brownian_qv_spread / self.meshes[-1].brownian_qv_spread

    def passed(self) -> bool:
        slope = self.canonical_slope
        slope_ok = np.isnan(slope) or abs(slope + 1.0) <= SLOPE_TOLERANCE
        return bool(slope_ok and all(mesh.passed() for mesh in self.meshes))

    def to_dict(self) -> dict[str, Any]:
        slope = self.canonical_slope
        return {
            "alpha": self.alpha,
            "canonical_slope": None if np.isnan(slope) else slope,
            "brownian_spread_ratio": self.brownian_spread_ratio,
            "meshes": [mesh.to_dict() for mesh in self.meshes],
        }


def _mesh_variation(
    steps: int, n_paths: int, seed: int, alpha: float, threads: Optional[int]
) -> MeshVariation:
    dt = 1.0 / steps
    dc = float(alpha_slope(alpha)) * dt

    def task(_: int, size: int, rng: np.random.Generator) -> NDArray[np.float64]:
        db = rng.standard_normal((size, steps, 2)) * np.sqrt(dt)
        return np.column_stack(
            [
                np.sum(db[..., 0] ** 2, axis=1),
                np.sum(db[..., 0], axis=1) * dc,
                np.sum(db[..., 0] * db[..., 1], axis=1),
            ]
        )

    stats = np.concatenate(run_blocks(task, n_paths, seed, threads, VARIATION_BLOCK))
    path = canonical_alpha_path(alpha, time_grid(1.0, steps))
    return MeshVariation(
        steps=steps,
        brownian_qv=SampleMean.of(stats[:, 0]),
        brownian_qv_spread=float(np.std(stats[:, 0], ddof=1)) if n_paths > 1 else 0.0,
        canonical_qv=float(np.sum(np.diff(path) ** 2)),
        brownian_canonical=SampleMean.of(stats[:, 1]),
        brownian_cross=SampleMean.of(stats[:, 2]),
    )


def variation_table_check(
    grid_steps: int,
    n_paths: int,
    rng_seed: int,
    alpha: float = 0.9,
    threads: Optional[int] = None,
) -> VariationReport:
    """在 grid_steps 与 2·grid_steps 两级网格上统计 [0,1] 上的各类变差。

    Raises:
        ValueError: grid_steps < 100
    """
    if grid_steps < MIN_GRID_STEPS:
        raise ValueError(f"grid_steps 至少为 {MIN_GRID_STEPS}，得到 {grid_steps}")
    meshes = tuple(
        _mesh_variation(steps, n_paths, rng_seed + level, alpha, threads)
        for level, steps in enumerate((grid_steps, 2 * grid_steps))
    )
    report = VariationReport(alpha=alpha, meshes=meshes)
    logger.info("乘法表验证: 典范二次变差斜率 %.4f", report.canonical_slope)
    return report


def ito_liu_remainder(
    sigma: float,
    eta: float,
    alpha: float,
    steps: int,
    n_paths: int,
    rng_seed: int,
    refinements: int = 1,
    x0: float = 1.0,
) -> NDArray[np.float64]:
    """dX = σdB + ηdC 下 G(x) = x² 的 Itô-Liu 展开余项的均方。

    余项为 X_T² − X_0² − [σ²T + Σ 2X_k σ ΔB_k + Σ 2X_k η ΔC_k]。
    在同一批布朗路径上依次计算 steps·2^j（j = 0..refinements）各级网格的结果，
    一阶收敛时相邻两级之比约为 2。

    Returns:
        形状 (refinements+1,) 的均方余项，由粗到细
    """
    finest = steps * 2**refinements
    rng = block_rng(rng_seed, 0)
    fine = rng.standard_normal((n_paths, finest)) * np.sqrt(1.0 / finest)
    slope = float(alpha_slope(alpha))
    out = np.empty(refinements + 1)
    for j in range(refinements + 1):
        n_steps = steps * 2**j
        dt = 1.0 / n_steps
        db = fine.reshape(n_paths, n_steps, -1).sum(axis=2)
        dx = sigma * db + eta * slope * dt
        x = x0 + np.concatenate([np.zeros((n_paths, 1)), np.cumsum(dx, axis=1)], axis=1)
        expansion = sigma**2 + np.sum(2.0 * x[:, :-1] * dx, axis=1)
        remainder = x[:, -1] ** 2 - x0**2 - expansion
        out[j] = float(np.mean(remainder**2))
    return out

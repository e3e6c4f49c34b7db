"""机会期望 E[ξ] = E_P[E_U[ξ]] 的估计。

内层不确定期望：在 α 的 Gauss-Legendre 节点上计算泛函并对 α ∈ (0,1) 积分；
外层概率期望：对随机路径（体制路径与布朗路径）取样本均值。
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np
from numpy.typing import NDArray

from hybrid_merton.core.errors import NonFiniteState
from hybrid_merton.hybridsim.canonical import gauss_legendre_unit
from hybrid_merton.hybridsim.parallel import DEFAULT_BLOCK_SIZE, run_blocks
from hybrid_merton.hybridsim.regimes import sample_regime_paths
from hybrid_merton.hybridsim.sde import HybridPathBundle, HybridSDE, simulate_block, time_grid
from hybrid_merton.market.generator import Generator

logger = logging.getLogger(__name__)

MIN_ALPHA_NODES = 3

# 泛函：路径块 -> 形状 (b, k) 的取值
Functional = Callable[[HybridPathBundle], NDArray[np.float64]]


@dataclass(frozen=True)
class ChanceEstimate:
    """机会期望的蒙特卡洛估计。

    Attributes:
        mean: 估计值
        std_error: 外层样本均值的标准误
        n_random_paths: 参与平均的随机路径数
        n_alpha_nodes: α 节点数
        rejected: 被拒绝的路径数
    """

    mean: float
    std_error: float
    n_random_paths: int
    n_alpha_nodes: int
    rejected: int = 0

    def z_score(self, reference: float) -> float:
        """(mean − reference) / std_error；标准误为 0 时按是否相等返回 0 或 ±inf。"""
        diff = self.mean - reference
        if self.std_error > 0.0:
            return diff / self.std_error
        return 0.0 if diff == 0.0 else float(np.copysign(np.inf, diff))

    def within(self, reference: float, n_sigma: float = 3.0) -> bool:
        """reference 是否落在 mean ± n_sigma·std_error 内。"""
        return abs(self.mean - reference) <= n_sigma * self.std_error

    def to_dict(self) -> dict[str, Any]:
        return {
            "mean": self.mean,
            "std_error": self.std_error,
            "n_random_paths": self.n_random_paths,
            "n_alpha_nodes": self.n_alpha_nodes,
            "rejected": self.rejected,
        }


def summarize(inner: NDArray[np.float64], n_alpha_nodes: int, rejected: int = 0) -> ChanceEstimate:
    """由每条随机路径的内层期望汇总出估计值与标准误。"""
    values = np.asarray(inner, dtype=np.float64)
    n = int(values.size)
    if n == 0:
        raise ValueError("没有可用的路径")
    if not np.all(np.isfinite(values)):
        raise NonFiniteState(float("nan"), int(np.count_nonzero(~np.isfinite(values))))
    mean = float(np.mean(values))
    if n == 1 or np.all(values == values[0]):
        std_error = 0.0
    else:
        std_error = float(np.std(values, ddof=1) / np.sqrt(n))
    return ChanceEstimate(
        mean=mean,
        std_error=std_error,
        n_random_paths=n,
        n_alpha_nodes=n_alpha_nodes,
        rejected=rejected,
    )


def chance_expectation(
    functional: Functional,
    sde: HybridSDE,
    gen: Generator,
    n_paths: int,
    alpha_nodes: int,
    rng_seed: int,
    *,
    i0: int = 0,
    horizon: float = 1.0,
    steps: int = 100,
    threads: Optional[int] = None,
    block_size: int = DEFAULT_BLOCK_SIZE,
    keep_paths: bool = False,
) -> ChanceEstimate:
    """估计泛函的机会期望 E_P[E_U[functional]]。

    Args:
        functional: 路径块 -> (b, k) 取值
        sde: 闭环系统
        gen: 体制生成元
        n_paths: 随机路径数（≥ 1）
        alpha_nodes: α 的 Gauss-Legendre 节点数（≥ 3）
        rng_seed: 随机种子
        i0: 初始体制（0 起计）
        horizon: 期限 T
        steps: 时间步数
        threads: 工作线程数
        block_size: 每块路径数
        keep_paths: 是否保留逐步状态；泛函只用终值时保持 False，内存按 O(b·k) 而非 O(b·k·N)

    Returns:
        ChanceEstimate
    """
    if alpha_nodes < MIN_ALPHA_NODES:
        raise ValueError(f"alpha_nodes 至少为 {MIN_ALPHA_NODES}，得到 {alpha_nodes}")
    if n_paths < 1:
        raise ValueError(f"n_paths 必须为正，得到 {n_paths}")
    nodes, weights = gauss_legendre_unit(alpha_nodes)
    times = time_grid(horizon, steps)

    def task(_: int, size: int, rng: np.random.Generator) -> NDArray[np.float64]:
        batch = sample_regime_paths(gen, i0, horizon, size, rng)
        bundle = simulate_block(sde, batch, times, nodes, rng, keep_paths=keep_paths)
        values = np.asarray(functional(bundle), dtype=np.float64)
        if values.shape != (size, alpha_nodes):
            raise ValueError(f"泛函应返回形状 {(size, alpha_nodes)}，得到 {values.shape}")
        return np.asarray(values @ weights, dtype=np.float64)

    inner = np.concatenate(run_blocks(task, n_paths, rng_seed, threads, block_size))
    estimate = summarize(inner, alpha_nodes)
    logger.info("机会期望: %.6g ± %.2g (%d 条路径)", estimate.mean, estimate.std_error, n_paths)
    return estimate

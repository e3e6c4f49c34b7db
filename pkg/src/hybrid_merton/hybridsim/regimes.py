"""体制链（连续时间马尔可夫链）路径采样与统计。"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from hybrid_merton.market.generator import Generator, check_regime

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RegimePathBatch:
    """一批右连续的体制阶梯路径。

    Attributes:
        jump_times: 形状 (n, K+1)，第 k 次跳跃时刻，不足处以 +inf 填充
        states: 形状 (n, K+1)，第 k 次跳跃之后所处体制（第 0 列为初始体制）
        horizon: 截断时刻 T
    """

    jump_times: NDArray[np.float64]
    states: NDArray[np.intp]
    horizon: float

    @property
    def n_paths(self) -> int:
        return int(self.states.shape[0])

    def jumps_before(self, t: ArrayLike) -> NDArray[np.intp]:
        """各路径在 [0, t] 内的跳跃次数（t 可逐路径给出）。"""
        ts = np.broadcast_to(np.asarray(t, dtype=np.float64), (self.n_paths,))
        return np.asarray(np.sum(self.jump_times <= ts[:, None], axis=1), dtype=np.intp)

    def regime_at(self, t: ArrayLike) -> NDArray[np.intp]:
        """各路径在 t 时刻的体制（右连续）。"""
        count = self.jumps_before(t)
        return np.asarray(self.states[np.arange(self.n_paths), count], dtype=np.intp)

    def path(self, k: int) -> "RegimePath":
        """第 k 条路径。"""
        times = self.jump_times[k]
        n_jumps = int(np.sum(np.isfinite(times)))
        return RegimePath(
            jump_times=times[:n_jumps].copy(),
            states=self.states[k, : n_jumps + 1].copy(),
            horizon=self.horizon,
        )


@dataclass(frozen=True, eq=False)
class RegimePath:
    """单条体制路径：states[k] 在 [jump_times[k−1], jump_times[k]) 上成立。"""

    jump_times: NDArray[np.float64]
    states: NDArray[np.intp]
    horizon: float

    @property
    def n_jumps(self) -> int:
        return int(self.jump_times.size)

    def regime_at(self, t: float) -> int:
        return int(self.states[int(np.searchsorted(self.jump_times, t, side="right"))])


def _cumulative_jumps(gen: Generator) -> NDArray[np.float64]:
    size = gen.n_regimes
    cum = np.zeros((size, size))
    for i in range(size):
        probs = gen.jump_probabilities(i)
        cum[i] = np.cumsum(probs)
        positive = np.flatnonzero(probs > 0.0)
        if positive.size:
            cum[i, positive[-1] :] = 1.0
    return cum


def sample_regime_paths(
    gen: Generator, i0: int, horizon: float, n_paths: int, rng: np.random.Generator
) -> RegimePathBatch:
    """批量采样体制路径。

    在体制 i 的停留时间服从速率 λ_i 的指数分布，跳向 j ≠ i 的概率为 q_ij/λ_i，
    路径在 T 处截断。
    """
    i0 = check_regime(i0, gen.n_regimes)
    lambdas = gen.lambdas
    cum = _cumulative_jumps(gen)

    current = np.full(n_paths, i0, dtype=np.intp)
    clock = np.zeros(n_paths)
    active = np.ones(n_paths, dtype=bool)
    times_cols: list[NDArray[np.float64]] = []
    state_cols: list[NDArray[np.intp]] = [current.copy()]

    while np.any(active):
        rate = lambdas[current]
        draws = rng.standard_exponential(n_paths)
        hold = np.full(n_paths, np.inf)
        moving = rate > 0.0
        hold[moving] = draws[moving] / rate[moving]
        u = rng.random(n_paths)

        nxt = clock + hold
        jumped = active & (nxt < horizon)
        dest = np.argmax(u[:, None] < cum[current], axis=1)
        current = np.where(jumped, dest, current)
        clock = np.where(jumped, nxt, clock)
        times_cols.append(np.where(jumped, nxt, np.inf))
        state_cols.append(current.copy())
        active = jumped

    # 最后一列全为 inf，保证 jump_times 比跳跃次数多一列
    jump_times = np.column_stack(times_cols)
    states = np.column_stack(state_cols[: jump_times.shape[1]])
    return RegimePathBatch(jump_times=jump_times, states=states, horizon=float(horizon))


def sample_regime_path(
    gen: Generator, i0: int, horizon: float, rng_seed: Optional[int] = None
) -> RegimePath:
    """采样单条体制路径。"""
    rng = np.random.default_rng(rng_seed)
    return sample_regime_paths(gen, i0, horizon, 1, rng).path(0)


@dataclass(frozen=True, eq=False)
class RegimeStatistics:
    """体制路径的经验统计。

    Attributes:
        occupation: 形状 (n, S)，每条路径在各体制的停留时间
        exits: 形状 (S,)，离开各体制的总次数
        destinations: 形状 (S, S)，i → j 的跳跃次数
        horizon: T
    """

    occupation: NDArray[np.float64]
    exits: NDArray[np.int64]
    destinations: NDArray[np.int64]
    horizon: float

    def mean_holding(self) -> NDArray[np.float64]:
        """删失数据下的停留时间极大似然估计：总停留时间 / 离开次数。"""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(self.occupation.sum(axis=0) / self.exits, dtype=np.float64)

    def mean_holding_stderr(self) -> NDArray[np.float64]:
        """停留时间估计的渐近标准误 mean/√exits。"""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(self.mean_holding() / np.sqrt(self.exits), dtype=np.float64)

    def occupation_fraction(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """各体制的平均占用比例及其标准误。"""
        frac = self.occupation / self.horizon
        n = frac.shape[0]
        stderr = frac.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(frac.shape[1])
        return frac.mean(axis=0), stderr

    def destination_frequencies(self) -> NDArray[np.float64]:
        """跳跃目标的经验频率（按行归一化）。"""
        totals = self.destinations.sum(axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(totals > 0, self.destinations / totals, 0.0)


def regime_statistics(batch: RegimePathBatch, n_regimes: int) -> RegimeStatistics:
    """统计一批路径的停留时间、离开次数与跳跃目标。"""
    horizon = batch.horizon
    n = batch.n_paths
    starts = np.column_stack([np.zeros(n), batch.jump_times[:, :-1]])
    ends = batch.jump_times
    durations = np.clip(np.minimum(ends, horizon) - np.minimum(starts, horizon), 0.0, None)

    occupation = np.zeros((n, n_regimes))
    for s in range(n_regimes):
        occupation[:, s] = np.sum(np.where(batch.states == s, durations, 0.0), axis=1)

    exits = np.zeros(n_regimes, dtype=np.int64)
    destinations = np.zeros((n_regimes, n_regimes), dtype=np.int64)
    for k in range(batch.jump_times.shape[1] - 1):
        jumped = np.isfinite(batch.jump_times[:, k])
        if not np.any(jumped):
            break
        src = batch.states[jumped, k]
        dst = batch.states[jumped, k + 1]
        np.add.at(destinations, (src, dst), 1)
    exits[:] = destinations.sum(axis=1)
    return RegimeStatistics(
        occupation=occupation, exits=exits, destinations=destinations, horizon=horizon
    )

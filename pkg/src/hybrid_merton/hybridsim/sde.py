"""混合不确定随机系统的 Euler 离散。

系统形式为

    dX = f(t, X, ζ) dt + g(t, X, ζ) dB + h(t, X, ζ) dC，

其中 ζ 为体制链，B 为 m 维布朗运动，C 为 n 维典范过程（以 α-路径表示）。
体制跳跃落在步内时，该步在跳跃时刻处拆分，每一段使用段左端的体制。
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Protocol

import numpy as np
from numpy.typing import ArrayLike, NDArray

from hybrid_merton.core.errors import DimensionMismatch, NonFiniteState
from hybrid_merton.hybridsim.canonical import alpha_slope
from hybrid_merton.hybridsim.parallel import DEFAULT_BLOCK_SIZE, run_blocks
from hybrid_merton.hybridsim.regimes import RegimePathBatch, sample_regime_paths
from hybrid_merton.market.generator import Generator

logger = logging.getLogger(__name__)

# 系数回调：(t (b,), x (b, p), regimes (b,)) -> 数组
Coefficient = Callable[
    [NDArray[np.float64], NDArray[np.float64], NDArray[np.intp]], NDArray[np.float64]
]

# 漂移在一段上的积分：(t0 (b,), t1 (b,), x (b, p), regimes (b,)) -> (b, p)
DriftIncrement = Callable[
    [NDArray[np.float64], NDArray[np.float64], NDArray[np.float64], NDArray[np.intp]],
    NDArray[np.float64],
]


@dataclass(frozen=True, eq=False)
class HybridSDE:
    """闭环形式的混合系统（控制已代入系数）。

    Attributes:
        drift: f(t, x, i)，返回 (b, p)
        brownian_coeff: g(t, x, i)，返回 (b, p, m)
        canonical_coeff: h(t, x, i)，返回 (b, p, n)
        x0: 初始状态，形状 (p,)
        n_brownian: 布朗运动维数 m
        n_canonical: 典范过程维数 n
        drift_increment: 可选，给出 ∫f dt 在一段上的精确（或高阶）值，替代 f·Δt
    """

    drift: Coefficient
    brownian_coeff: Coefficient
    canonical_coeff: Coefficient
    x0: NDArray[np.float64]
    n_brownian: int
    n_canonical: int
    drift_increment: Optional[DriftIncrement] = None

    def __post_init__(self) -> None:
        x0 = np.atleast_1d(np.array(self.x0, dtype=np.float64))
        if x0.ndim != 1:
            raise DimensionMismatch(f"x0 必须是向量，得到形状 {x0.shape}")
        if self.n_brownian < 1 or self.n_canonical < 1:
            raise DimensionMismatch("布朗运动与典范过程维数必须为正")
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)

    @property
    def dim(self) -> int:
        """状态维数 p。"""
        return int(self.x0.size)

    def with_initial(self, x0: ArrayLike) -> "HybridSDE":
        """替换初始状态。"""
        return HybridSDE(
            drift=self.drift,
            brownian_coeff=self.brownian_coeff,
            canonical_coeff=self.canonical_coeff,
            x0=np.asarray(x0, dtype=np.float64),
            n_brownian=self.n_brownian,
            n_canonical=self.n_canonical,
            drift_increment=self.drift_increment,
        )


@dataclass(frozen=True, eq=False)
class HybridPathBundle:
    """一块路径：b 条随机路径 × k 个 α 节点。

    Attributes:
        times: 均匀时间网格，形状 (N+1,)
        regimes: 节点处的体制（右连续），形状 (b, N+1)
        alpha: α 分位水平，形状 (k,)
        brownian_terminal: B_T，形状 (b, m)
        terminal: X_T，形状 (b, k, p)
        alive: 未被拒绝的路径，形状 (b,)
        brownian: 每步布朗增量，形状 (b, N, m)；keep_paths=False 时为 None
        state: 节点处的状态，形状 (b, k, N+1, p)；keep_paths=False 时为 None
    """

    times: NDArray[np.float64]
    regimes: NDArray[np.intp]
    alpha: NDArray[np.float64]
    brownian_terminal: NDArray[np.float64]
    terminal: NDArray[np.float64]
    alive: NDArray[np.bool_]
    brownian: Optional[NDArray[np.float64]] = None
    state: Optional[NDArray[np.float64]] = None

    @property
    def n_paths(self) -> int:
        return int(self.regimes.shape[0])

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def brownian_path(self) -> NDArray[np.float64]:
        """累积布朗路径 B_{t_k}，形状 (b, N+1, m)。"""
        if self.brownian is None:
            raise ValueError("路径未保留（keep_paths=False）")
        b, _, m = self.brownian.shape
        return np.concatenate([np.zeros((b, 1, m)), np.cumsum(self.brownian, axis=1)], axis=1)

    def canonical_path(self) -> NDArray[np.float64]:
        """各 α 节点的 α-路径 C_{t_k}^α，形状 (k, N+1)。"""
        return np.asarray(alpha_slope(self.alpha)[:, None] * self.times[None, :], dtype=np.float64)

    def canonical_terminal(self) -> NDArray[np.float64]:
        """C_T^α，形状 (k,)。"""
        return np.asarray(alpha_slope(self.alpha) * self.horizon, dtype=np.float64)


class PieceObserver(Protocol):
    """每个 Euler 分段之后的回调。

    返回与 idx 对齐的布尔数组，为 True 的路径被拒绝并冻结；返回 None 表示不拒绝。
    """

    def on_piece(
        self,
        idx: NDArray[np.intp],
        t0: NDArray[np.float64],
        t1: NDArray[np.float64],
        regimes: NDArray[np.intp],
        x_old: NDArray[np.float64],
        x_new: NDArray[np.float64],
    ) -> Optional[NDArray[np.bool_]]: ...


def euler_step(
    sde: HybridSDE,
    t: NDArray[np.float64],
    x: NDArray[np.float64],
    regimes: NDArray[np.intp],
    dt: NDArray[np.float64],
    db: NDArray[np.float64],
    slope: NDArray[np.float64],
) -> NDArray[np.float64]:
    """一个 Euler 分段 x + f·Δt + g·ΔB + h·ΔC^α（有 drift_increment 时以其替代 f·Δt）。

    Args:
        t: 分段左端时刻，形状 (b,)
        x: 当前状态，形状 (b, k, p)
        regimes: 分段内冻结的体制，形状 (b,)
        dt: 分段长度，形状 (b,)
        db: 布朗增量，形状 (b, m)
        slope: α-路径斜率，形状 (k,)；每个典范分量的增量为 slope·Δt
    """
    b, k, p = x.shape
    flat_t = np.repeat(t, k)
    flat_x = x.reshape(b * k, p)
    flat_r = np.repeat(regimes, k)

    if sde.drift_increment is None:
        f = np.asarray(sde.drift(flat_t, flat_x, flat_r)).reshape(b, k, p)
        move = f * dt[:, None, None]
    else:
        flat_end = flat_t + np.repeat(dt, k)
        move = np.asarray(sde.drift_increment(flat_t, flat_end, flat_x, flat_r)).reshape(b, k, p)
    g = np.asarray(sde.brownian_coeff(flat_t, flat_x, flat_r)).reshape(b, k, p, sde.n_brownian)
    h = np.asarray(sde.canonical_coeff(flat_t, flat_x, flat_r)).reshape(
        b, k, p, sde.n_canonical
    )

    dc = slope[None, :] * dt[:, None]
    return np.asarray(
        x
        + move
        + np.einsum("bkpm,bm->bkp", g, db)
        + h.sum(axis=-1) * dc[:, :, None],
        dtype=np.float64,
    )


def simulate_block(
    sde: HybridSDE,
    regimes: RegimePathBatch,
    times: NDArray[np.float64],
    alpha: ArrayLike,
    rng: np.random.Generator,
    observer: Optional[PieceObserver] = None,
    keep_paths: bool = True,
) -> HybridPathBundle:
    """在给定体制路径上对一块路径做 Euler 积分。

    每个分段重新抽取 N(0, δ) 的布朗增量；一步内各分段的增量之和记为该步的增量。

    Raises:
        NonFiniteState: 未被拒绝的路径状态出现非有限值
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
    slope = alpha_slope(alpha)
    n = regimes.n_paths
    steps = times.size - 1
    m = sde.n_brownian
    rows = np.arange(n)
    jump_times = regimes.jump_times
    states = regimes.states
    last_col = jump_times.shape[1] - 1

    x = np.broadcast_to(sde.x0, (n, alpha.size, sde.dim)).copy()
    ptr = np.zeros(n, dtype=np.intp)
    alive = np.ones(n, dtype=bool)
    node_regimes = np.empty((n, steps + 1), dtype=np.intp)
    node_regimes[:, 0] = states[:, 0]
    increments = np.zeros((n, steps, m)) if keep_paths else None
    path_state = np.empty((n, alpha.size, steps + 1, sde.dim)) if keep_paths else None
    if path_state is not None:
        path_state[:, :, 0, :] = x
    b_total = np.zeros((n, m))

    for k in range(steps):
        t_end = times[k + 1]
        clock = np.full(n, times[k])
        db_step = np.zeros((n, m))
        while True:
            nxt = jump_times[rows, ptr]
            stop = np.minimum(nxt, t_end)
            dt = stop - clock
            idx = np.flatnonzero(alive & (dt > 0.0))
            if idx.size == 0:
                break
            db = np.sqrt(dt[idx])[:, None] * rng.standard_normal((idx.size, m))
            reg = states[idx, ptr[idx]]
            x_old = x[idx]
            x_new = euler_step(sde, clock[idx], x_old, reg, dt[idx], db, slope)

            kill = np.zeros(idx.size, dtype=bool)
            if observer is not None:
                flagged = observer.on_piece(idx, clock[idx], stop[idx], reg, x_old, x_new)
                if flagged is not None:
                    kill = np.asarray(flagged, dtype=bool)
            bad = ~np.all(np.isfinite(x_new), axis=(1, 2)) & ~kill
            if np.any(bad):
                raise NonFiniteState(float(t_end), int(np.count_nonzero(bad)))

            x[idx] = x_new
            db_step[idx] += db
            alive[idx[kill]] = False
            clock[idx] = stop[idx]
            reached = nxt[idx] <= stop[idx]
            ptr[idx] = np.minimum(ptr[idx] + reached, last_col)

        node_regimes[:, k + 1] = states[rows, ptr]
        b_total += db_step
        if increments is not None:
            increments[:, k, :] = db_step
        if path_state is not None:
            path_state[:, :, k + 1, :] = x

    return HybridPathBundle(
        times=times,
        regimes=node_regimes,
        alpha=alpha,
        brownian_terminal=b_total,
        terminal=x,
        alive=alive,
        brownian=increments,
        state=path_state,
    )


def time_grid(horizon: float, steps: int) -> NDArray[np.float64]:
    """[0, T] 上的均匀网格，末点精确等于 T。"""
    if steps < 1:
        raise ValueError(f"steps 必须为正，得到 {steps}")
    times = np.linspace(0.0, horizon, steps + 1)
    times[-1] = horizon
    return times


def simulate_paths(
    sde: HybridSDE,
    gen: Generator,
    i0: int,
    horizon: float,
    steps: int,
    n_paths: int,
    alpha: ArrayLike,
    rng_seed: int,
    threads: Optional[int] = None,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> list[HybridPathBundle]:
    """按块模拟完整路径，返回按块序排列的路径块。"""
    times = time_grid(horizon, steps)

    def task(_: int, size: int, rng: np.random.Generator) -> HybridPathBundle:
        batch = sample_regime_paths(gen, i0, horizon, size, rng)
        return simulate_block(sde, batch, times, alpha, rng)

    return run_blocks(task, n_paths, rng_seed, threads, block_size)

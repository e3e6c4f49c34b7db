"""按块并行的蒙特卡洛执行器。

路径被切分为固定大小的块，块 b 使用 SeedSequence(seed, spawn_key=(b,)) 派生的
独立随机数流；结果按块序归并，因此与工作线程数无关。
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, TypeVar

import numpy as np
import psutil

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZE = 2048

T = TypeVar("T")


def default_threads() -> int:
    """默认工作线程数：物理核数。"""
    count = psutil.cpu_count(logical=False) or os.cpu_count() or 1
    return max(int(count), 1)


def block_rng(seed: int, block: int) -> np.random.Generator:
    """块 block 的随机数生成器。"""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(block,))
    return np.random.Generator(np.random.PCG64(sequence))


def block_sizes(n_paths: int, block_size: int = DEFAULT_BLOCK_SIZE) -> list[int]:
    """把 n_paths 切成若干块的大小列表。"""
    if n_paths < 1:
        raise ValueError(f"n_paths 必须为正，得到 {n_paths}")
    if block_size < 1:
        raise ValueError(f"block_size 必须为正，得到 {block_size}")
    full, rest = divmod(n_paths, block_size)
    return [block_size] * full + ([rest] if rest else [])


def run_blocks(
    task: Callable[[int, int, np.random.Generator], T],
    n_paths: int,
    seed: int,
    threads: Optional[int] = None,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> list[T]:
    """执行 task(block_index, block_paths, rng)，按块序返回结果。

    Args:
        task: 单块任务
        n_paths: 总路径数
        seed: 随机种子
        threads: 工作线程数（None 表示物理核数）
        block_size: 每块路径数

    Returns:
        各块结果（按块序）
    """
    sizes = block_sizes(n_paths, block_size)
    workers = min(threads or default_threads(), len(sizes))
    logger.debug("蒙特卡洛: %d 条路径, %d 块, %d 线程", n_paths, len(sizes), workers)

    def run(b: int) -> T:
        return task(b, sizes[b], block_rng(seed, b))

    if workers <= 1:
        return [run(b) for b in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(len(sizes))))

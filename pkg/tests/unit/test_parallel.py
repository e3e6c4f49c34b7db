"""分块并行执行器单元测试"""

import numpy as np
import pytest

from hybrid_merton.hybridsim import block_rng, default_threads, run_blocks
from hybrid_merton.hybridsim.parallel import block_sizes


def _block_sum(b: int, size: int, rng: np.random.Generator) -> tuple[int, int, float]:
    return b, size, float(rng.standard_normal(size).sum())


class TestBlockSizes:
    """分块测试"""

    def test_split(self) -> None:
        assert block_sizes(5000, 2048) == [2048, 2048, 904]
        assert block_sizes(4096, 2048) == [2048, 2048]
        assert block_sizes(10, 2048) == [10]

    @pytest.mark.parametrize("n_paths,block_size", [(0, 10), (10, 0)])
    def test_invalid(self, n_paths, block_size) -> None:
        with pytest.raises(ValueError):
            block_sizes(n_paths, block_size)


class TestBlockRng:
    """块随机数流测试"""

    def test_reproducible(self) -> None:
        a = block_rng(7, 3).random(5)
        b = block_rng(7, 3).random(5)
        np.testing.assert_array_equal(a, b)

    def test_independent_blocks(self) -> None:
        assert not np.array_equal(block_rng(7, 0).random(5), block_rng(7, 1).random(5))
        assert not np.array_equal(block_rng(7, 0).random(5), block_rng(8, 0).random(5))


class TestRunBlocks:
    """并行执行测试"""

    def test_block_order(self) -> None:
        results = run_blocks(_block_sum, 1000, seed=1, threads=3, block_size=128)
        assert [r[0] for r in results] == list(range(8))
        assert sum(r[1] for r in results) == 1000

    def test_thread_count_invariant(self) -> None:
        """测试结果与线程数无关"""
        one = run_blocks(_block_sum, 3000, seed=5, threads=1, block_size=256)
        many = run_blocks(_block_sum, 3000, seed=5, threads=4, block_size=256)
        assert one == many

    def test_default_threads(self) -> None:
        assert default_threads() >= 1

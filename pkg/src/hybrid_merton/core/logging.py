"""日志配置。

库代码只通过 ``logging.getLogger(__name__)`` 记录日志，
处理器只由 CLI 通过 :func:`configure_logging` 安装。
"""

import logging

from rich.console import Console
from rich.logging import RichHandler

PACKAGE_LOGGER = "hybrid_merton"


def verbosity_to_level(verbose: int) -> int:
    """把 -v 次数映射为日志级别。"""
    if verbose >= 2:
        return logging.DEBUG
    if verbose == 1:
        return logging.INFO
    return logging.WARNING


def configure_logging(verbose: int = 0) -> logging.Logger:
    """为包日志器安装 rich 处理器。

    重复调用时替换已有处理器，不会重复输出。

    Args:
        verbose: -v 出现次数

    Returns:
        包日志器
    """
    logger = logging.getLogger(PACKAGE_LOGGER)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    handler = RichHandler(
        console=Console(stderr=True),
        show_time=verbose >= 2,
        show_path=verbose >= 2,
        markup=False,
        rich_tracebacks=verbose >= 2,
    )
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(verbosity_to_level(verbose))
    logger.propagate = False
    return logger

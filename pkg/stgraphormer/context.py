import logging
from pathlib import Path
from typing import Optional, Union

from .errors import ConfigError
from .utils import get_logger, thread_limit


class RunContext:
    """一次命令运行的上下文, 管理输出目录, 日志级别, 种子与线程上限.

    该类实现了上下文管理器协议, 可以使用 with 语句来管理一次运行的生命周期.
    """

    def __init__(self,
                 out_dir: Union[str, Path],
                 seed: int = 0,
                 log_level: int = logging.INFO,
                 logger: Optional[logging.Logger] = None) -> None:
        """初始化 RunContext 实例.

        Args:
            out_dir (Union[str, Path]): 输出目录, 进入上下文时创建.
            seed (int, optional): 运行种子. 默认为 0.
            log_level (int, optional): 日志记录的级别. 默认为 logging.INFO.
            logger (Optional[logging.Logger], optional): 用于记录日志的 Logger 实例. 如果为 None, 则会创建一个新的 RichLogger 实例. 默认为 None.
        """
        # PRIVATE
        self._out_dir = Path(out_dir)
        self._seed = int(seed)

        # LOGGING
        logging.basicConfig(level=log_level)
        logging.getLogger().handlers.clear()
        self.logger = get_logger('stgraphormer.context') if logger is None else logger

    def __enter__(self) -> 'RunContext':
        try:
            self._out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            self.logger.critical(f'Cannot create output directory {self._out_dir}.', exc_info=e)
            raise ConfigError(f'Cannot create output directory {self._out_dir}.') from e
        self.logger.info(f'Run begin: out={self._out_dir}, seed={self._seed}, threads={self.threads}.')
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        if exc_type is not None:
            self.logger.error('Run exit with exception.', exc_info=(exc_type, exc_val, exc_tb))
        else:
            self.logger.info('Run exit.')
        return None

    @property
    def out_dir(self) -> Path:
        """当前运行的输出目录."""
        return self._out_dir

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def threads(self) -> int:
        """``ST_GRAPHORMER_THREADS`` 给出的工作线程上限."""
        return thread_limit()

    def path(self, *parts: str) -> Path:
        """输出目录下的路径, 父目录会被创建."""
        path = self._out_dir.joinpath(*parts)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path


import time
from threading import Thread, Event
from typing import Callable, Union


class ProgressLogger(Thread):
    """周期性打印进度的后台日志线程.

    线程只读取 ``current`` 并打印, 不参与任何计算, 因此不影响运行结果的确定性.
    """

    def __init__(self,
                 logger: Callable[[str], None],
                 header: str,
                 unit: str,
                 total: Union[int, float],
                 period: float = 5.0):
        """初始化 ProgressLogger.

        Args:
            logger (Callable[[str], None]): 日志输出函数, 例如 ``logger.info``.
            header (str): 日志前缀.
            unit (str): 进度单位, 例如 ``steps``.
            total (Union[int, float]): 总量.
            period (float, optional): 打印周期, 单位秒. 默认为 5.0.
        """
        super().__init__()
        self.daemon = True

        self.logger = logger
        self.header = header
        self.unit = unit
        self.total = total
        self.current = 0
        self.period = period
        self._stop_event = Event()
        self._time_begin = 0.0

    def run(self):
        # wait 返回 True 表示已被 stop, 防止在等待期间停止后仍然打印
        while not self._stop_event.wait(self.period):
            elapsed = time.perf_counter() - self._time_begin
            progress = self.current / self.total if self.total else 1.0
            rate = self.current / elapsed if elapsed > 0 else 0.0
            msg = (f'{self.header}: {self.current} / {self.total} {self.unit} ({progress:.2%}), '
                   f'{rate:.2f} {self.unit}/s')
            self.logger(msg)

    def start(self) -> 'ProgressLogger':
        self._stop_event.clear()
        self._time_begin = time.perf_counter()
        super().start()
        return self

    def stop(self) -> 'ProgressLogger':
        self._stop_event.set()
        return self

    def update(self, value: Union[int, float]) -> 'ProgressLogger':
        self.current = value
        return self

    def __enter__(self) -> 'ProgressLogger':
        return self.start()

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.stop()

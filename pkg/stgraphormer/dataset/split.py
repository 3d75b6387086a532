import math
from dataclasses import dataclass
from typing import Tuple

from ..errors import ConfigError
from .series import RawSeries


@dataclass(frozen=True)
class SplitSpec:
    """按时间顺序划分训练/验证/测试集的比例."""
    train_frac: float = 0.7
    val_frac: float = 0.1
    test_frac: float = 0.2

    def __post_init__(self) -> None:
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if any(f <= 0 for f in fracs):
            raise ConfigError(f'Split fractions must all be positive, got {fracs}.')
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ConfigError(f'Split fractions must sum to 1, got {sum(fracs)}.')


def split_bounds(length: int, spec: SplitSpec) -> Tuple[int, int]:
    """训练集与验证集的结束下标, 余数行归入测试集."""
    # 小的正偏移吸收 0.7 * 10 = 7.000000000000001 一类的浮点误差
    first = math.floor(length * spec.train_frac + 1e-9)
    second = math.floor(length * (spec.train_frac + spec.val_frac) + 1e-9)
    return first, second


def chronological_split(series: RawSeries,
                        spec: SplitSpec,
                        input_steps: int = 12,
                        horizon: int = 12) -> Tuple[RawSeries, RawSeries, RawSeries]:
    """按原有顺序切出连续的训练, 验证, 测试片段.

    边界为 floor(L·train_frac) 与 floor(L·(train_frac+val_frac)).

    Raises:
        ConfigError: 如果任一片段短于 T′ + T.
    """
    first, second = split_bounds(series.length, spec)
    parts = (series[:first], series[first:second], series[second:])
    for name, part in zip(('train', 'val', 'test'), parts):
        if part.length < input_steps + horizon:
            raise ConfigError(f'The {name} split has {part.length} rows, fewer than T\'+T = {input_steps + horizon}.')
    return parts

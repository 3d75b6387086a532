from dataclasses import dataclass
from typing import Union

import numpy as np

from ..errors import ConfigError
from .series import RawSeries


ArrayOrFloat = Union[np.ndarray, float]


@dataclass(frozen=True)
class Normalizer:
    """Z-score 归一化参数, 只在训练集速度通道上拟合."""
    mean: float
    std: float

    def __post_init__(self) -> None:
        if not self.std > 0:
            raise ConfigError(f'Normalizer std must be positive, got {self.std}.')

    def apply(self, x: ArrayOrFloat) -> ArrayOrFloat:
        return (x - self.mean) / self.std

    def invert(self, z: ArrayOrFloat) -> ArrayOrFloat:
        return z * self.std + self.mean


def fit_normalizer(train: RawSeries) -> Normalizer:
    """在 (插补后的) 训练集全部速度上计算均值与总体标准差.

    Raises:
        ConfigError: 如果训练集为空或标准差为 0.
    """
    if train.values.size == 0:
        raise ConfigError('Cannot fit a normalizer on an empty training split.')
    std = float(train.values.std())
    if std == 0.0:
        raise ConfigError('Training split has zero standard deviation; Z-score normalization is undefined.')
    return Normalizer(mean=float(train.values.mean()), std=std)


def apply_normalizer(x: ArrayOrFloat, normalizer: Normalizer) -> ArrayOrFloat:
    return normalizer.apply(x)


def invert_normalizer(z: ArrayOrFloat, normalizer: Normalizer) -> ArrayOrFloat:
    return normalizer.invert(z)

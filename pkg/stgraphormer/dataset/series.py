from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from ..errors import ConfigError
from ..utils import load_container, save_container


PathLike = Union[str, Path]


class RawSeries:
    """原始传感器时间序列: L×N 的速度矩阵与等间隔时间戳."""

    def __init__(self, values: np.ndarray, timestamps: pd.DatetimeIndex, sampling_interval: pd.Timedelta) -> None:
        """初始化 RawSeries.

        Args:
            values (np.ndarray): L×N 的速度矩阵.
            timestamps (pd.DatetimeIndex): L 个严格递增的时间戳.
            sampling_interval (pd.Timedelta): 采样间隔.

        Raises:
            ConfigError: 如果形状不一致或时间戳不是严格等间隔递增.
        """
        self.values = np.asarray(values, dtype=np.float64)
        self.timestamps = pd.DatetimeIndex(timestamps)
        self.sampling_interval = pd.Timedelta(sampling_interval)

        if self.values.ndim != 2:
            raise ConfigError(f'Series values must be an L x N matrix, got shape {self.values.shape}.')
        if len(self.timestamps) != self.values.shape[0]:
            raise ConfigError(f'{len(self.timestamps)} timestamps for {self.values.shape[0]} rows.')
        if self.sampling_interval <= pd.Timedelta(0):
            raise ConfigError(f'Sampling interval must be positive, got {self.sampling_interval}.')
        if len(self.timestamps) > 1:
            steps = np.diff(self.timestamps.asi8)
            if np.any(steps != self.sampling_interval.value):
                raise ConfigError(f'Timestamps must be strictly increasing with constant spacing {self.sampling_interval}.')

    @classmethod
    def regular(cls, values: np.ndarray, start: Union[str, pd.Timestamp], sampling_interval: pd.Timedelta) -> 'RawSeries':
        """由起始时间与采样间隔生成等间隔时间戳."""
        timestamps = pd.date_range(start=pd.Timestamp(start), periods=len(values), freq=pd.Timedelta(sampling_interval))
        return cls(values, timestamps, sampling_interval)

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def num_nodes(self) -> int:
        return self.values.shape[1]

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, item: slice) -> 'RawSeries':
        if not isinstance(item, slice):
            raise TypeError('RawSeries only supports slicing by rows.')
        return RawSeries(self.values[item], self.timestamps[item], self.sampling_interval)

    def with_values(self, values: np.ndarray) -> 'RawSeries':
        return RawSeries(values, self.timestamps, self.sampling_interval)

    def __repr__(self) -> str:
        return f'RawSeries(L={self.length}, N={self.num_nodes}, interval={self.sampling_interval})'


def _infer_interval(timestamps: pd.DatetimeIndex) -> pd.Timedelta:
    if len(timestamps) < 2:
        raise ConfigError('At least two timestamps are needed to infer the sampling interval.')
    return pd.Timedelta(timestamps[1] - timestamps[0])


def read_series_csv(path: PathLike) -> RawSeries:
    """读取首列为 ISO-8601 时间戳, 其余 N 列为传感器速度的 CSV."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f'Series file {path} does not exist.')
    frame = pd.read_csv(path, index_col=0, parse_dates=[0])
    timestamps = pd.DatetimeIndex(frame.index)
    return RawSeries(frame.to_numpy(dtype=np.float64), timestamps, _infer_interval(timestamps))


def write_series_csv(path: PathLike, series: RawSeries) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = [str(i) for i in range(series.num_nodes)]
    frame = pd.DataFrame(series.values, index=series.timestamps, columns=columns)
    frame.index.name = 'timestamp'
    frame.to_csv(path, date_format='%Y-%m-%dT%H:%M:%S', float_format='%.17g')
    return path


def read_series_binary(stem: PathLike) -> RawSeries:
    """读取二进制容器形式的序列, 清单需包含 ``start`` 与 ``interval_minutes``."""
    arrays, meta = load_container(stem)
    if 'values' not in arrays or 'start' not in meta or 'interval_minutes' not in meta:
        raise ConfigError(f'Binary series {stem} needs a "values" tensor and start/interval_minutes in its manifest.')
    return RawSeries.regular(arrays['values'], meta['start'], pd.Timedelta(minutes=meta['interval_minutes']))


def write_series_binary(stem: PathLike, series: RawSeries) -> Path:
    meta = {
        'start': series.timestamps[0].isoformat(),
        'interval_minutes': series.sampling_interval / pd.Timedelta(minutes=1),
    }
    return save_container(stem, {'values': series.values}, meta)


def read_series(path: PathLike) -> RawSeries:
    """按扩展名选择 CSV 或二进制容器读取."""
    path = Path(path)
    if path.suffix in ('.bin', '.json'):
        return read_series_binary(path.with_suffix(''))
    return read_series_csv(path)

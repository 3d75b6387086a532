import numpy as np
import pandas as pd

from ..errors import ConfigError


_DAY = pd.Timedelta(days=1)


def slots_per_day(sampling_interval: pd.Timedelta) -> int:
    """一天内的时间槽数量, 5 分钟采样时为 288.

    Raises:
        ConfigError: 如果采样间隔不能整除 24 小时.
    """
    interval = pd.Timedelta(sampling_interval)
    if interval <= pd.Timedelta(0) or _DAY.value % interval.value != 0:
        raise ConfigError(f'Sampling interval {interval} does not divide 24 hours.')
    return int(_DAY.value // interval.value)


def time_of_day_slots(timestamps: pd.DatetimeIndex, sampling_interval: pd.Timedelta) -> np.ndarray:
    """每个时间戳所在的时间槽: (自午夜起的时长 / 采样间隔) mod 每日槽数."""
    count = slots_per_day(sampling_interval)
    timestamps = pd.DatetimeIndex(timestamps)
    since_midnight = timestamps.asi8 - timestamps.normalize().asi8
    return (since_midnight // pd.Timedelta(sampling_interval).value % count).astype(np.int64)


def time_of_day_features(timestamps: pd.DatetimeIndex, sampling_interval: pd.Timedelta) -> np.ndarray:
    """L×slots_per_day 的时间槽独热矩阵."""
    slots = time_of_day_slots(timestamps, sampling_interval)
    return np.eye(slots_per_day(sampling_interval), dtype=np.float64)[slots]

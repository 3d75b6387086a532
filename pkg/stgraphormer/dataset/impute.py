import numpy as np

from ..utils import get_logger
from .series import RawSeries
from .time_features import slots_per_day, time_of_day_slots


logger = get_logger('stgraphormer.dataset.impute')


def impute_historical_average(train: RawSeries) -> RawSeries:
    """用历史均值填补训练集中的 0 值 (缺失读数).

    对 (传感器 i, 时刻 t) 的 0 值, 取同一传感器在同一日内时间槽上所有非零值的均值;
    该均值无定义时退回传感器整体非零均值; 仍无定义则保留 0. 非零值永不改变.
    """
    values = train.values
    missing = values == 0
    if not missing.any():
        return train.with_values(values.copy())

    slots = time_of_day_slots(train.timestamps, train.sampling_interval)
    present = (~missing).astype(np.float64)

    slot_sums = np.zeros((slots_per_day(train.sampling_interval), train.num_nodes))
    slot_counts = np.zeros_like(slot_sums)
    np.add.at(slot_sums, slots, values * present)
    np.add.at(slot_counts, slots, present)

    sensor_sums = (values * present).sum(axis=0)
    sensor_counts = present.sum(axis=0)

    with np.errstate(invalid='ignore', divide='ignore'):
        slot_mean = np.where(slot_counts > 0, slot_sums / slot_counts, np.nan)
        sensor_mean = np.where(sensor_counts > 0, sensor_sums / sensor_counts, np.nan)

    fill = slot_mean[slots]
    fill = np.where(np.isnan(fill), sensor_mean[None, :], fill)
    fallback = missing & np.isnan(slot_mean[slots])
    empty = missing & np.isnan(fill)
    fill = np.where(np.isnan(fill), 0.0, fill)

    if fallback.any():
        logger.warning(f'{int(fallback.sum())} missing entries had no same-slot history; used sensor-wide means.')
    if empty.any():
        logger.warning(f'{int(empty.sum())} missing entries belong to sensors with no readings; kept as 0.')
    logger.info(f'Imputed {int(missing.sum())} missing entries ({missing.mean():.2%}) with historical averages.')
    return train.with_values(np.where(missing, fill, values))

import numpy as np

from ..dataset import Normalizer, WindowDataset
from .metrics import MetricsReport, metrics_report


def persistence_forecast(X: np.ndarray, normalizer: Normalizer, horizon: int) -> np.ndarray:
    """把最后一个观测到的速度 (反归一化后) 复制到全部预测步.

    ``X`` 为 (T′, N, C) 或 (B, T′, N, C), 返回 (T, N, 1) 或 (B, T, N, 1).
    """
    last = normalizer.invert(np.asarray(X)[..., -1, :, :1])
    return np.repeat(np.expand_dims(last, axis=-3), horizon, axis=-3)


def evaluate_persistence(dataset: WindowDataset, batch_size: int = 256) -> MetricsReport:
    preds, truths = [], []
    for start in range(0, len(dataset), batch_size):
        X, Y = dataset.batch(range(start, min(start + batch_size, len(dataset))))
        preds.append(persistence_forecast(X, dataset.normalizer, dataset.horizon))
        truths.append(Y)
    return metrics_report(np.concatenate(preds), np.concatenate(truths))

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..dataset import WindowDataset
from ..errors import ConfigError, NumericError, ShapeError
from ..utils import get_logger, thread_limit


logger = get_logger('stgraphormer.evaluation.metrics')

PathLike = Union[str, Path]
STANDARD_HORIZONS = (3, 6, 12)


def report_horizons(horizon: int) -> List[int]:
    """报告的步长: {3, 6, 12} 中不超过 T 的部分, 都超过时只报告 T."""
    horizons = [h for h in STANDARD_HORIZONS if h <= horizon]
    return horizons or [horizon]


def horizon_slice(pred: np.ndarray, h: int, axis: int = 0) -> np.ndarray:
    """保留前 h 个预测步.

    Raises:
        ConfigError: 如果 h 不在 [1, T] 内.
    """
    steps = pred.shape[axis]
    if not 1 <= h <= steps:
        raise ConfigError(f'Horizon {h} is outside [1, {steps}].')
    return np.take(pred, np.arange(h), axis=axis)


def masked_metrics(pred: np.ndarray, truth: np.ndarray) -> Tuple[float, float, float]:
    """只在真值非零的位置计算 MAE, RMSE 与 MAPE (百分比).

    Raises:
        ShapeError: 如果形状不一致.
        NumericError: 如果真值全为 0.
    """
    pred, truth = np.asarray(pred, dtype=np.float64), np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape:
        raise ShapeError(f'Prediction shape {pred.shape} differs from truth shape {truth.shape}.')
    mask = truth != 0
    if not mask.any():
        raise NumericError('Metric mask is empty: every ground-truth entry is zero.')
    error = np.abs(pred[mask] - truth[mask])
    mae = float(error.mean())
    rmse = float(np.sqrt((error * error).mean()))
    mape = float(100.0 * (error / np.abs(truth[mask])).mean())
    return mae, rmse, mape


@dataclass(frozen=True)
class HorizonMetrics:
    mae: float
    rmse: float
    mape: float


@dataclass
class MetricsReport:
    """各报告步长 h 上的 MAE / RMSE / MAPE."""
    horizons: Dict[int, HorizonMetrics] = field(default_factory=dict)

    def at(self, h: int) -> HorizonMetrics:
        return self.horizons[h]

    @property
    def longest(self) -> HorizonMetrics:
        return self.horizons[max(self.horizons)]

    def average(self) -> HorizonMetrics:
        values = list(self.horizons.values())
        return HorizonMetrics(mae=float(np.mean([m.mae for m in values])),
                              rmse=float(np.mean([m.rmse for m in values])),
                              mape=float(np.mean([m.mape for m in values])))

    def select(self, select_by: str = 'horizon_12') -> HorizonMetrics:
        """模型选择使用的指标: 最长报告步长, 或各步长平均."""
        if select_by == 'horizon_12':
            return self.longest
        if select_by == 'average':
            return self.average()
        raise ConfigError(f'Unknown selection criterion {select_by!r}.')

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for m in self.horizons.values() for v in (m.mae, m.rmse, m.mape))

    def to_dict(self) -> Dict[str, Any]:
        return {str(h): {'mae': m.mae, 'rmse': m.rmse, 'mape': m.mape} for h, m in sorted(self.horizons.items())}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'MetricsReport':
        return cls({int(h): HorizonMetrics(**m) for h, m in data.items()})

    def to_frame(self) -> pd.DataFrame:
        rows = [{'horizon': h, 'mae': m.mae, 'rmse': m.rmse, 'mape': m.mape} for h, m in sorted(self.horizons.items())]
        return pd.DataFrame(rows, columns=['horizon', 'mae', 'rmse', 'mape'])

    def write(self, stem: PathLike) -> Tuple[Path, Path]:
        """写出 ``<stem>.json`` 与每个步长一行的 ``<stem>.csv``."""
        stem = Path(stem)
        stem.parent.mkdir(parents=True, exist_ok=True)
        path_json, path_csv = stem.with_suffix('.json'), stem.with_suffix('.csv')
        with open(path_json, 'w') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write('\n')
        self.to_frame().to_csv(path_csv, index=False)
        return path_json, path_csv


def metrics_report(pred: np.ndarray, truth: np.ndarray, horizons: Optional[Sequence[int]] = None) -> MetricsReport:
    """对 (S, T, N, C) 的预测与真值按步长切片后计算指标."""
    if pred.shape != truth.shape:
        raise ShapeError(f'Prediction shape {pred.shape} differs from truth shape {truth.shape}.')
    horizons = report_horizons(pred.shape[1]) if horizons is None else list(horizons)
    report = MetricsReport()
    for h in horizons:
        mae, rmse, mape = masked_metrics(horizon_slice(pred, h, axis=1), horizon_slice(truth, h, axis=1))
        report.horizons[h] = HorizonMetrics(mae, rmse, mape)
    return report


def evaluate(model, dataset: WindowDataset, batch_size: int = 64, horizons: Optional[Sequence[int]] = None) -> MetricsReport:
    """在整个划分上推理并计算报告指标.

    批次之间相互独立, ``ST_GRAPHORMER_THREADS`` 大于 1 时并行推理, 结果按批次顺序拼接.

    Args:
        model: 可调用的模型, 输入 (B, T′, N, C) 返回原始单位的 (B, T, N, C_out) 预测.
        dataset (WindowDataset): 待评估的划分.
        batch_size (int, optional): 推理批大小. 默认为 64.
        horizons (Optional[Sequence[int]], optional): 报告步长, 默认由 T 决定.

    Raises:
        ConfigError: 如果数据集为空.
    """
    if len(dataset) == 0:
        raise ConfigError(f'Split {dataset.name!r} has no windows to evaluate.')
    chunks = [range(s, min(s + batch_size, len(dataset))) for s in range(0, len(dataset), batch_size)]

    def run(indices: range) -> Tuple[np.ndarray, np.ndarray]:
        X, Y = dataset.batch(indices)
        return model(X).data, Y

    workers = min(thread_limit(), len(chunks))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(chunk) for chunk in chunks]

    pred = np.concatenate([p for p, _ in results], axis=0)
    truth = np.concatenate([y for _, y in results], axis=0)
    report = metrics_report(pred, truth, horizons)
    logger.debug(f'Evaluated {len(dataset)} windows of {dataset.name!r}: {report.to_dict()}.')
    return report

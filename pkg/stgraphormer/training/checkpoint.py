from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..dataset import Normalizer
from ..errors import ShapeError
from ..evaluation.metrics import MetricsReport
from ..model import GraphMaxima, GraphStructure, ModelConfig, ParameterSet, TGraphormer
from ..utils import get_logger, load_container, save_container
from .config import TrainConfig
from .optimizer import OptimizerState


logger = get_logger('stgraphormer.training.checkpoint')

PathLike = Union[str, Path]

_PARAM, _M, _V = 'param/', 'adam_m/', 'adam_v/'


@dataclass
class Checkpoint:
    """一次训练的可恢复快照.

    Attributes:
        params: 参数数组, 以稳定名称索引.
        model_config: 网络配置.
        train_config: 训练超参数.
        maxima: 决定编码表大小的图统计量.
        normalizer: 训练集拟合的归一化参数.
        epoch: 已完成的最后一个 epoch (0 起).
        seed: 运行种子.
        val_metrics: 该 epoch 的验证指标.
        optimizer: AdamW 状态, 只有续训用的快照才携带.
        best_score: 截至该 epoch 的最佳验证分数.
        best_epoch: 最佳验证分数所在的 epoch.
    """
    params: 'OrderedDict[str, np.ndarray]'
    model_config: ModelConfig
    train_config: TrainConfig
    maxima: GraphMaxima
    normalizer: Normalizer
    epoch: int
    seed: int
    val_metrics: Optional[MetricsReport] = None
    optimizer: Optional[OptimizerState] = None
    best_score: float = float('inf')
    best_epoch: int = -1

    def build_model(self, structure: GraphStructure) -> TGraphormer:
        """用快照中的参数构造模型.

        Raises:
            ShapeError: 如果图结构的统计量与快照不一致.
        """
        if structure.maxima != self.maxima:
            raise ShapeError(f'Graph maxima {structure.maxima} differ from the checkpoint {self.maxima}.')
        return TGraphormer(self.model_config, ParameterSet.from_arrays(self.params), structure, self.normalizer)


def save_checkpoint(stem: PathLike, checkpoint: Checkpoint) -> Path:
    arrays = OrderedDict((_PARAM + name, array) for name, array in checkpoint.params.items())
    if checkpoint.optimizer is not None:
        arrays.update((_M + name, array) for name, array in checkpoint.optimizer.m.items())
        arrays.update((_V + name, array) for name, array in checkpoint.optimizer.v.items())

    meta = {
        'model': checkpoint.model_config.to_dict(),
        'train': checkpoint.train_config.to_dict(),
        'maxima': checkpoint.maxima.to_dict(),
        'normalizer': {'mean': checkpoint.normalizer.mean, 'std': checkpoint.normalizer.std},
        'epoch': checkpoint.epoch,
        'seed': checkpoint.seed,
        'val_metrics': None if checkpoint.val_metrics is None else checkpoint.val_metrics.to_dict(),
        'optimizer_step': None if checkpoint.optimizer is None else checkpoint.optimizer.step,
        'best_score': checkpoint.best_score,
        'best_epoch': checkpoint.best_epoch,
    }
    path = save_container(stem, arrays, meta)
    logger.debug(f'Checkpoint (epoch {checkpoint.epoch}) written to {path}.')
    return path


def load_checkpoint(stem: PathLike) -> Checkpoint:
    """读取检查点.

    Raises:
        ConfigError: 如果检查点文件缺失或损坏.
    """
    arrays, meta = load_container(stem)

    def group(prefix: str) -> 'OrderedDict[str, np.ndarray]':
        return OrderedDict((key[len(prefix):], array) for key, array in arrays.items() if key.startswith(prefix))

    optimizer = None
    if meta['optimizer_step'] is not None:
        optimizer = OptimizerState(m=group(_M), v=group(_V), step=int(meta['optimizer_step']))
    val_metrics = None if meta['val_metrics'] is None else MetricsReport.from_dict(meta['val_metrics'])
    return Checkpoint(params=group(_PARAM),
                      model_config=ModelConfig.from_dict(meta['model']),
                      train_config=TrainConfig.from_dict(meta['train']),
                      maxima=GraphMaxima(**meta['maxima']),
                      normalizer=Normalizer(**meta['normalizer']),
                      epoch=int(meta['epoch']),
                      seed=int(meta['seed']),
                      val_metrics=val_metrics,
                      optimizer=optimizer,
                      best_score=float(meta['best_score']),
                      best_epoch=int(meta['best_epoch']))

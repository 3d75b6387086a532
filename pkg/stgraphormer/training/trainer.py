import math
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from ..dataset import PreparedData, shuffle_order
from ..errors import ConfigError, NumericError
from ..evaluation.metrics import MetricsReport, evaluate
from ..model import TGraphormer
from ..numerics import Tape, backward
from ..utils import ProgressLogger, get_logger
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import TrainConfig
from .loss import huber_loss, missing_mask
from .optimizer import OptimizerState, adamw_step, clip_global_norm
from .schedule import layer_lr_scales, lr_at, step_fraction


PathLike = Union[str, Path]

LOG_COLUMNS = ['epoch', 'train_loss', 'val_mae', 'val_rmse', 'val_mape', 'lr']


@dataclass
class TrainResult:
    best: Checkpoint
    last: Checkpoint
    log: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=LOG_COLUMNS))


class Trainer:
    """单进程训练器, 独占模型参数与优化器状态.

    每次优化器更新累积 ``grad_accum_steps`` 个微批的梯度, 裁剪后以调度学习率执行 AdamW;
    每个 epoch 结束时计算验证指标, 保留验证分数最低的检查点.

    输出目录 (给出时):

    - ``best.bin`` / ``best.json``: 验证分数最低的参数.
    - ``last.bin`` / ``last.json``: 最近一个 epoch 的参数与优化器状态, 用于续训.
    - ``log.csv``: 每个 epoch 一行的训练日志.
    """

    def __init__(self,
                 model: TGraphormer,
                 config: TrainConfig,
                 data: PreparedData,
                 seed: int = 0,
                 out_dir: Optional[PathLike] = None,
                 show_progress: bool = True,
                 eval_batch_size: int = 64) -> None:
        """初始化 Trainer.

        Args:
            model (TGraphormer): 待训练的模型, 参数被原地更新.
            config (TrainConfig): 训练超参数.
            data (PreparedData): 训练, 验证与测试划分.
            seed (int, optional): 打乱与 dropout 的种子. 默认为 0.
            out_dir (Optional[PathLike], optional): 检查点与日志目录, 为 None 时不写文件.
            show_progress (bool, optional): 是否以 info 级别周期性打印进度. 默认为 True.
            eval_batch_size (int, optional): 验证推理的批大小. 默认为 64.
        """
        self.logger = get_logger('stgraphormer.training.trainer')
        if model.config.dropout != config.dropout:
            self.logger.warning(f'Model dropout {model.config.dropout} replaced by train dropout {config.dropout}.')
            model.config = model.config.with_changes(dropout=config.dropout)
        self.model = model
        self.config = config
        self.data = data
        self.seed = seed
        self.out_dir = None if out_dir is None else Path(out_dir)
        self.show_progress = show_progress
        self.eval_batch_size = eval_batch_size

        self.state = OptimizerState.zeros(model.params)
        self.scales = layer_lr_scales(model.params.names(), model.config.layers, config.layer_decay)
        self.start_epoch = 0
        self.best_score = math.inf
        self.best_epoch = -1
        self.rows: List[Dict[str, float]] = []

    @property
    def steps_per_epoch(self) -> int:
        return math.ceil(len(self.data.train) / self.config.effective_batch)

    @property
    def total_steps(self) -> int:
        return self.config.epochs * self.steps_per_epoch

    def resume(self, stem: PathLike) -> 'Trainer':
        """从带优化器状态的检查点恢复参数, 矩估计, 更新计数, epoch 与最佳分数.

        Raises:
            ConfigError: 如果检查点不含优化器状态.
            ShapeError: 如果检查点与模型形状不一致.
        """
        checkpoint = load_checkpoint(stem)
        if checkpoint.optimizer is None:
            raise ConfigError(f'Checkpoint {stem} carries no optimizer state and cannot be resumed.')
        if checkpoint.train_config != self.config:
            self.logger.warning('Resumed checkpoint was trained with a different train config; using the current one.')
        self.model.params.load(checkpoint.params)
        checkpoint.optimizer.check(self.model.params)
        self.state = checkpoint.optimizer
        self.start_epoch = checkpoint.epoch + 1
        self.best_score = checkpoint.best_score
        self.best_epoch = checkpoint.best_epoch

        if self.out_dir is not None and (self.out_dir / 'log.csv').exists():
            log = pd.read_csv(self.out_dir / 'log.csv')
            self.rows = log[log['epoch'] <= checkpoint.epoch].to_dict('records')
        self.logger.info(f'Resumed from {stem} at epoch {self.start_epoch}, optimizer step {self.state.step}.')
        return self

    def _checkpoint(self, epoch: int, report: Optional[MetricsReport], with_optimizer: bool) -> Checkpoint:
        optimizer = None
        if with_optimizer:
            optimizer = OptimizerState(m=OrderedDict((k, a.copy()) for k, a in self.state.m.items()),
                                       v=OrderedDict((k, a.copy()) for k, a in self.state.v.items()),
                                       step=self.state.step)
        return Checkpoint(params=self.model.params.snapshot(),
                          model_config=self.model.config,
                          train_config=self.config,
                          maxima=self.model.structure.maxima,
                          normalizer=self.data.normalizer,
                          epoch=epoch,
                          seed=self.seed,
                          val_metrics=report,
                          optimizer=optimizer,
                          best_score=self.best_score,
                          best_epoch=self.best_epoch)

    def train_step(self, indices: np.ndarray) -> float:
        """一次优化器更新: 累积各微批梯度, 裁剪, AdamW.

        各微批的掩码损失之和除以整个更新的掩码计数, 因此累积结果与一次处理全部样本相同.

        Returns:
            float: 该次更新的平均损失.

        Raises:
            NumericError: 如果损失或梯度出现非有限值.
        """
        step = self.state.step
        train = self.data.train
        micro_batches = [indices[i:i + self.config.batch_size] for i in range(0, len(indices), self.config.batch_size)]
        targets = [train.batch(batch)[1] for batch in micro_batches]
        denominator = sum(float(missing_mask(y).sum()) for y in targets)
        rng = np.random.default_rng([self.seed, 2, step])

        self.model.params.zero_grad()
        if denominator == 0:
            # 不更新参数与矩估计, 只推进步数使学习率日程保持对齐
            self.state.step += 1
            self.logger.warning(f'Optimizer step {step} has no observed targets; parameters are left unchanged.')
            return 0.0

        total = 0.0
        for batch, target in zip(micro_batches, targets):
            X, _ = train.batch(batch)
            with Tape():
                pred = self.model(X, training=True, rng=rng)
                loss = huber_loss(pred, target, self.config.huber_delta, denominator=denominator)
                backward(loss)
            total += loss.item()

        if not math.isfinite(total):
            self.logger.critical(f'Loss became {total} at optimizer step {step}.')
            raise NumericError(f'Non-finite training loss {total} at optimizer step {step}.')

        grads, norm = clip_global_norm(self.model.params.grads(), self.config.clip_norm)
        lr = lr_at(step_fraction(step, self.total_steps), self.config)
        adamw_step(self.model.params, grads, self.state, lr, self.scales,
                   self.config.weight_decay, self.config.betas, self.config.eps)
        self.logger.debug(f'Step {step}: loss={total:.6f}, grad norm={norm:.4f}, lr={lr:.3e}.')
        return total

    def _write_log(self) -> None:
        if self.out_dir is None:
            return
        pd.DataFrame(self.rows, columns=LOG_COLUMNS).to_csv(self.out_dir / 'log.csv', index=False)

    def train(self) -> TrainResult:
        """运行全部剩余 epoch.

        Returns:
            TrainResult: 最佳与最后的检查点以及训练日志.

        Raises:
            NumericError: 如果出现非有限的损失或梯度; 上一个 epoch 写出的检查点保留不变.
        """
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        report_fn = self.logger.info if self.show_progress else self.logger.debug
        effective = self.config.effective_batch
        self.logger.info(f'Training {self.config.epochs} epochs x {self.steps_per_epoch} steps, '
                         f'effective batch {effective}, {self.model.params.count()} parameters.')

        best: Optional[Checkpoint] = None
        last: Optional[Checkpoint] = None
        with ProgressLogger(report_fn, 'Training', 'steps', self.total_steps) as progress:
            progress.update(self.state.step)
            for epoch in range(self.start_epoch, self.config.epochs):
                order = shuffle_order(len(self.data.train), self.seed, epoch)
                losses = []
                for s in range(self.steps_per_epoch):
                    losses.append(self.train_step(order[s * effective:(s + 1) * effective]))
                    progress.update(self.state.step)

                report = evaluate(self.model, self.data.val, self.eval_batch_size)
                selected = report.select(self.config.select_by)
                lr = lr_at(step_fraction(self.state.step - 1, self.total_steps), self.config)
                self.rows.append({'epoch': epoch,
                                  'train_loss': float(np.mean(losses)),
                                  'val_mae': selected.mae,
                                  'val_rmse': selected.rmse,
                                  'val_mape': selected.mape,
                                  'lr': lr})

                improved = selected.mae < self.best_score
                if improved:
                    self.best_score = selected.mae
                    self.best_epoch = epoch
                    best = self._checkpoint(epoch, report, with_optimizer=False)
                last = self._checkpoint(epoch, report, with_optimizer=True)
                if self.out_dir is not None:
                    if improved:
                        save_checkpoint(self.out_dir / 'best', best)
                    save_checkpoint(self.out_dir / 'last', last)
                    self._write_log()
                self.logger.info(f'Epoch {epoch}: train loss {np.mean(losses):.4f}, val MAE {selected.mae:.4f}'
                                 f'{" (best)" if improved else ""}.')

        if best is None and self.out_dir is not None and (self.out_dir / 'best.json').exists():
            best = load_checkpoint(self.out_dir / 'best')
        if last is None:
            last = self._checkpoint(self.start_epoch - 1, None, with_optimizer=True)
        self.logger.info(f'Best val MAE {self.best_score:.4f} at epoch {self.best_epoch}.')
        return TrainResult(best=best if best is not None else last,
                           last=last,
                           log=pd.DataFrame(self.rows, columns=LOG_COLUMNS))


def train(model: TGraphormer,
          config: TrainConfig,
          data: PreparedData,
          seed: int = 0,
          out_dir: Optional[PathLike] = None,
          resume: Optional[PathLike] = None,
          show_progress: bool = True) -> TrainResult:
    """构造 Trainer 并训练; 给出 ``resume`` 时先从检查点恢复."""
    trainer = Trainer(model, config, data, seed=seed, out_dir=out_dir, show_progress=show_progress)
    if resume is not None:
        trainer.resume(resume)
    return trainer.train()

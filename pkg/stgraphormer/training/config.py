import math
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, Tuple

from ..errors import ConfigError


SELECT_BY = ('horizon_12', 'average')


@dataclass(frozen=True)
class TrainConfig:
    """训练超参数.

    Attributes:
        epochs: 训练轮数.
        warmup_epochs: 线性预热轮数, 必须小于 epochs.
        base_lr: 预热结束时的学习率.
        weight_decay: AdamW 解耦权重衰减系数.
        clip_norm: 全局梯度范数上限, 可为 ``inf``.
        huber_delta: Huber 损失的 δ.
        layer_decay: 逐层学习率衰减系数.
        batch_size: 微批大小.
        grad_accum_steps: 每次优化器更新累积的微批数, 有效批大小为两者之积.
        dropout: 训练时的 dropout 概率.
        select_by: 模型选择依据, ``horizon_12`` 取最长报告步长的验证 MAE, ``average`` 取各步长平均.
        betas: AdamW 的一阶与二阶矩衰减.
        eps: AdamW 分母中的 ε.
    """
    epochs: int = 50
    warmup_epochs: int = 10
    base_lr: float = 1e-3
    weight_decay: float = 1e-4
    clip_norm: float = 1.0
    huber_delta: float = 1.5
    layer_decay: float = 0.9
    batch_size: int = 128
    grad_accum_steps: int = 1
    dropout: float = 0.1
    select_by: str = 'horizon_12'
    betas: Tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8

    def __post_init__(self) -> None:
        object.__setattr__(self, 'betas', tuple(self.betas))
        for name in ('epochs', 'batch_size', 'grad_accum_steps'):
            if getattr(self, name) <= 0:
                raise ConfigError(f'Train config "{name}" must be positive, got {getattr(self, name)}.')
        if not 0 <= self.warmup_epochs < self.epochs:
            raise ConfigError(f'Warmup epochs must lie in [0, epochs={self.epochs}), got {self.warmup_epochs}.')
        for name in ('base_lr', 'clip_norm', 'huber_delta', 'eps'):
            value = getattr(self, name)
            if math.isnan(value) or value <= 0:
                raise ConfigError(f'Train config "{name}" must be positive, got {value}.')
        if not self.weight_decay >= 0:
            raise ConfigError(f'Weight decay must be nonnegative, got {self.weight_decay}.')
        if not 0 < self.layer_decay <= 1:
            raise ConfigError(f'Layer decay must lie in (0, 1], got {self.layer_decay}.')
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f'Dropout must lie in [0, 1), got {self.dropout}.')
        if self.select_by not in SELECT_BY:
            raise ConfigError(f'Unknown selection criterion {self.select_by!r}, expected one of {SELECT_BY}.')
        if len(self.betas) != 2 or not all(0 <= b < 1 for b in self.betas):
            raise ConfigError(f'AdamW betas must be two values in [0, 1), got {self.betas}.')

    @property
    def effective_batch(self) -> int:
        return self.batch_size * self.grad_accum_steps

    def with_changes(self, **changes: Any) -> 'TrainConfig':
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['betas'] = list(self.betas)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TrainConfig':
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f'Unknown train config keys: {sorted(unknown)}.')
        return cls(**data)

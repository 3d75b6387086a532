import math
from typing import Dict, Iterable, Optional

from ..errors import ConfigError
from ..model import layer_of
from .config import TrainConfig


def lr_at(fraction: float, config: TrainConfig) -> float:
    """训练进度 ``fraction`` ∈ [0, 1] (占总轮数的比例) 处的学习率.

    预热段从 0 线性升到 base_lr, 之后按余弦从 base_lr 衰减到 0.
    """
    fraction = min(max(float(fraction), 0.0), 1.0)
    warm = config.warmup_epochs / config.epochs
    if fraction < warm:
        return config.base_lr * fraction / warm
    progress = (fraction - warm) / (1.0 - warm)
    return config.base_lr * 0.5 * (1.0 + math.cos(math.pi * progress))


def step_fraction(step: int, total_steps: int) -> float:
    """第 ``step`` (0 起) 次更新使用的进度, 最后一次更新落在 1.0."""
    return (step + 1) / total_steps


def layer_lr_scale(layer: Optional[int], num_layers: int, layer_decay: float) -> float:
    """编码器第 j 层取 decay^(k−j), 输入嵌入与编码 (layer = -1) 取 decay^(k+1), 预测头 (None) 取 1."""
    if layer is None:
        return 1.0
    return layer_decay ** (num_layers - layer)


def layer_lr_scales(names: Iterable[str], num_layers: int, layer_decay: float) -> Dict[str, float]:
    """每个参数的学习率乘子.

    Raises:
        ConfigError: 如果 layer_decay 不在 (0, 1] 内.
    """
    if not 0 < layer_decay <= 1:
        raise ConfigError(f'Layer decay must lie in (0, 1], got {layer_decay}.')
    return {name: layer_lr_scale(layer_of(name), num_layers, layer_decay) for name in names}

import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from ..errors import ConfigError, NumericError, ShapeError
from ..model import decays_weight
from ..numerics import Tensor
from ..utils import get_logger


logger = get_logger('stgraphormer.training.optimizer')


def global_norm(grads: Mapping[str, np.ndarray]) -> float:
    return math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))


def clip_global_norm(grads: Mapping[str, np.ndarray], max_norm: float) -> Tuple[Dict[str, np.ndarray], float]:
    """按全局 L2 范数裁剪梯度: g ← g·min(1, max_norm/‖g‖).

    Returns:
        Tuple[Dict[str, np.ndarray], float]: 裁剪后的梯度与裁剪前的全局范数.

    Raises:
        ConfigError: 如果 max_norm 不为正.
        NumericError: 如果梯度中出现非有限值.
    """
    if not max_norm > 0:
        raise ConfigError(f'Clip norm must be positive, got {max_norm}.')
    for name, grad in grads.items():
        if not np.all(np.isfinite(grad)):
            logger.critical(f'Non-finite gradient in {name}.')
            raise NumericError(f'Non-finite gradient in parameter {name}.')

    norm = global_norm(grads)
    if norm <= max_norm:
        return dict(grads), norm
    scale = max_norm / norm
    return {name: grad * scale for name, grad in grads.items()}, norm


@dataclass
class OptimizerState:
    """AdamW 的逐参数一阶矩 m, 二阶矩 v 与已完成的更新次数."""
    m: 'OrderedDict[str, np.ndarray]'
    v: 'OrderedDict[str, np.ndarray]'
    step: int = 0

    @classmethod
    def zeros(cls, params: Mapping[str, Tensor]) -> 'OptimizerState':
        return cls(m=OrderedDict((name, np.zeros_like(t.data)) for name, t in params.items()),
                   v=OrderedDict((name, np.zeros_like(t.data)) for name, t in params.items()),
                   step=0)

    def check(self, params: Mapping[str, Tensor]) -> None:
        """确认矩估计与参数一一对应.

        Raises:
            ShapeError: 如果名称或形状不一致.
        """
        if set(self.m) != set(params) or set(self.v) != set(params):
            raise ShapeError('Optimizer state does not cover the same parameters as the model.')
        for name, tensor in params.items():
            if self.m[name].shape != tensor.shape or self.v[name].shape != tensor.shape:
                raise ShapeError(f'Optimizer state for {name} has shape {self.m[name].shape}, '
                                 f'parameter has {tensor.shape}.')


def adamw_step(params: Mapping[str, Tensor],
               grads: Mapping[str, np.ndarray],
               state: OptimizerState,
               lr: float,
               scales: Optional[Mapping[str, float]] = None,
               weight_decay: float = 0.0,
               betas: Tuple[float, float] = (0.9, 0.999),
               eps: float = 1e-8,
               decays: Callable[[str], bool] = decays_weight) -> OptimizerState:
    """原地执行一次 AdamW 更新.

    对每个参数以 lr_g = lr·scale 先做解耦衰减 θ ← θ·(1 − lr_g·wd) (仅 ``decays(name)`` 为真的参数),
    再做带偏差校正的 Adam 更新 θ ← θ − lr_g·m̂/(√v̂ + ε).

    Returns:
        OptimizerState: 更新后的状态 (同一对象).
    """
    state.check(params)
    beta1, beta2 = betas
    state.step += 1
    correction1 = 1.0 - beta1 ** state.step
    correction2 = 1.0 - beta2 ** state.step

    for name, tensor in params.items():
        grad = grads[name]
        lr_g = lr * (1.0 if scales is None else scales[name])
        if weight_decay and decays(name):
            tensor.data *= 1.0 - lr_g * weight_decay

        m, v = state.m[name], state.v[name]
        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * grad * grad
        tensor.data -= lr_g * (m / correction1) / (np.sqrt(v / correction2) + eps)
    return state

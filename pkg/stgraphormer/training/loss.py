from typing import Optional, Union

import numpy as np

from .. import numerics as nx
from ..errors import NumericError, ShapeError
from ..numerics import Tensor


def missing_mask(target: np.ndarray) -> np.ndarray:
    """目标为 0 的位置视为缺失, 返回 0/1 浮点掩码."""
    return (np.asarray(target) != 0).astype(np.float64)


def huber_loss(pred: Tensor,
               target: np.ndarray,
               delta: float = 1.5,
               mask: Optional[np.ndarray] = None,
               denominator: Optional[Union[int, float]] = None) -> Tensor:
    """掩码 Huber 损失.

    逐元素 e = pred − target, |e| ≤ δ 时取 0.5e², 否则取 δ(|e| − 0.5δ); 对掩码为 1 的元素求和后除以分母.

    Args:
        pred (Tensor): 预测.
        target (np.ndarray): 与预测同形的目标.
        delta (float, optional): δ. 默认为 1.5.
        mask (Optional[np.ndarray], optional): 0/1 掩码; 为 None 时按目标非零生成.
        denominator (Optional[Union[int, float]], optional): 归一化分母; 为 None 时取掩码中 1 的个数.
            梯度累积时传入整个优化步的掩码计数, 使各微批损失之和等于整批的平均损失.

    Returns:
        Tensor: 标量损失.

    Raises:
        ShapeError: 如果预测, 目标与掩码形状不一致.
        NumericError: 如果分母为 0 (掩码全为 0).
    """
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeError(f'Prediction shape {pred.shape} differs from target shape {target.shape}.')
    mask = missing_mask(target) if mask is None else np.asarray(mask, dtype=np.float64)
    if mask.shape != target.shape:
        raise ShapeError(f'Mask shape {mask.shape} differs from target shape {target.shape}.')
    denominator = float(mask.sum()) if denominator is None else float(denominator)
    if denominator <= 0:
        raise NumericError('Huber loss mask selects no elements.')

    error = pred - target
    magnitude = nx.abs(error)
    quadratic = 0.5 * error * error
    linear = delta * (magnitude - 0.5 * delta)
    elementwise = nx.where(magnitude.data <= delta, quadratic, linear)
    return nx.sum(elementwise * mask) / denominator

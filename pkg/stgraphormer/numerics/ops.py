"""自动微分原语.

每个原语先用 numpy 计算前向结果; 若当前线程有激活的 Tape 且任一输入需要梯度,
则把反向函数记录到 Tape 上. 反向函数接收输出梯度, 返回与输入一一对应的梯度 (不需要时为 None).
"""
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import erf

from ..errors import ConfigError, ShapeError
from .tensor import ArrayLike, BackwardFn, Tensor, current_tape


Operand = Union[Tensor, ArrayLike]
Axis = Optional[Union[int, Tuple[int, ...]]]

_SQRT_2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _as_tensor(value: Operand) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _emit(data: np.ndarray, inputs: Tuple[Tensor, ...], backward_fn: BackwardFn) -> Tensor:
    out = Tensor(data)
    tape = current_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        tape.record(inputs, out, backward_fn)
    return out


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """把广播后的梯度按广播规则求和回原形状."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


# ---- 逐元素算术 ----

def add(a: Operand, b: Operand) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _emit(a.data + b.data, (a, b), backward)


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _emit(a.data - b.data, (a, b), backward)


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _emit(a.data * b.data, (a, b), backward)


def div(a: Operand, b: Operand) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)

    def backward(g):
        return (_unbroadcast(g / b.data, a.shape),
                _unbroadcast(-g * a.data / (b.data * b.data), b.shape))

    return _emit(a.data / b.data, (a, b), backward)


def neg(a: Operand) -> Tensor:
    a = _as_tensor(a)
    return _emit(-a.data, (a,), lambda g: (-g,))


def abs(a: Operand) -> Tensor:
    a = _as_tensor(a)
    return _emit(np.abs(a.data), (a,), lambda g: (g * np.sign(a.data),))


def where(condition: np.ndarray, a: Operand, b: Operand) -> Tensor:
    """按布尔条件逐元素选择 ``a`` 或 ``b``, 条件本身不可导."""
    a, b = _as_tensor(a), _as_tensor(b)
    condition = np.asarray(condition, dtype=bool)

    def backward(g):
        return (_unbroadcast(np.where(condition, g, 0.0), a.shape),
                _unbroadcast(np.where(condition, 0.0, g), b.shape))

    return _emit(np.where(condition, a.data, b.data), (a, b), backward)


# ---- 形状操作 ----

def reshape(a: Operand, shape: Sequence[int]) -> Tensor:
    a = _as_tensor(a)
    return _emit(a.data.reshape(shape), (a,), lambda g: (g.reshape(a.shape),))


def transpose(a: Operand, axes: Optional[Sequence[int]] = None) -> Tensor:
    a = _as_tensor(a)
    axes = tuple(axes) if axes else tuple(reversed(range(a.ndim)))
    inverse = tuple(np.argsort(axes))
    return _emit(np.transpose(a.data, axes), (a,), lambda g: (np.transpose(g, inverse),))


def broadcast_to(a: Operand, shape: Sequence[int]) -> Tensor:
    a = _as_tensor(a)
    data = np.broadcast_to(a.data, tuple(shape)).copy()
    return _emit(data, (a,), lambda g: (_unbroadcast(g, a.shape),))


def concat(tensors: Sequence[Operand], axis: int = 0) -> Tensor:
    tensors = tuple(_as_tensor(t) for t in tensors)
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _emit(np.concatenate([t.data for t in tensors], axis=axis), tensors, backward)


def take(a: Operand, indices: np.ndarray, axis: int = 0) -> Tensor:
    """沿 ``axis`` 按整数索引取值 (嵌入表查询, 丢弃特殊 token 等).

    反向时重复出现的索引会累加梯度.
    """
    a = _as_tensor(a)
    indices = np.asarray(indices, dtype=np.int64)
    axis = axis % a.ndim

    def backward(g):
        grad = np.zeros_like(a.data)
        view = np.moveaxis(grad, axis, 0)
        moved = np.moveaxis(g, list(range(axis, axis + indices.ndim)), list(range(indices.ndim)))
        np.add.at(view, indices, moved)
        return (grad,)

    return _emit(np.take(a.data, indices, axis=axis), (a,), backward)


# ---- 归约 ----

def sum(a: Operand, axis: Axis = None, keepdims: bool = False) -> Tensor:
    a = _as_tensor(a)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return _emit(np.sum(a.data, axis=axis, keepdims=keepdims), (a,), backward)


def mean(a: Operand, axis: Axis = None, keepdims: bool = False) -> Tensor:
    a = _as_tensor(a)
    count = a.size if axis is None else int(np.prod([a.shape[i] for i in np.atleast_1d(axis)]))
    return div(sum(a, axis=axis, keepdims=keepdims), float(count))


# ---- 线性代数与神经网络原语 ----

def matmul(a: Operand, b: Operand) -> Tensor:
    """矩阵乘法, 支持前导批维度广播. C[i][j] = Σ_r A[i][r]·B[r][j].

    Raises:
        ShapeError: 如果任一输入少于二维或内维不一致.
    """
    a, b = _as_tensor(a), _as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError(f'matmul shape mismatch: {a.shape} @ {b.shape}.')

    def backward(g):
        grad_a = np.matmul(g, np.swapaxes(b.data, -1, -2))
        grad_b = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return _unbroadcast(grad_a, a.shape), _unbroadcast(grad_b, b.shape)

    return _emit(np.matmul(a.data, b.data), (a, b), backward)


def softmax_rows(a: Operand) -> Tensor:
    """沿最后一维的 softmax, 先减去行最大值以保证数值稳定."""
    a = _as_tensor(a)
    shifted = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=-1, keepdims=True)

    def backward(g):
        return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)

    return _emit(y, (a,), backward)


def layer_norm(x: Operand, gamma: Operand, beta: Operand, eps: float = 1e-5) -> Tensor:
    """对最后一维做层归一化: (x−μ)/√(σ²+ε)·γ + β."""
    x, gamma, beta = _as_tensor(x), _as_tensor(gamma), _as_tensor(beta)
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = centered * inv_std

    def backward(g):
        g_hat = g * gamma.data
        grad_x = inv_std * (g_hat
                            - g_hat.mean(axis=-1, keepdims=True)
                            - x_hat * (g_hat * x_hat).mean(axis=-1, keepdims=True))
        grad_gamma = _unbroadcast(g * x_hat, gamma.shape)
        grad_beta = _unbroadcast(g, beta.shape)
        return grad_x, grad_gamma, grad_beta

    return _emit(x_hat * gamma.data + beta.data, (x, gamma, beta), backward)


def gelu(x: Operand) -> Tensor:
    """精确 erf 形式的 GELU: 0.5·x·(1+erf(x/√2))."""
    x = _as_tensor(x)
    cdf = 0.5 * (1.0 + erf(x.data / _SQRT_2))

    def backward(g):
        pdf = _INV_SQRT_2PI * np.exp(-0.5 * x.data * x.data)
        return (g * (cdf + x.data * pdf),)

    return _emit(x.data * cdf, (x,), backward)


def dropout(x: Operand, p: float, training: bool, rng: Optional[np.random.Generator] = None) -> Tensor:
    """反向缩放的 dropout: 训练时以概率 p 置零并把保留值放大 1/(1−p), 推理时恒等.

    Raises:
        ConfigError: 如果 p 不在 [0, 1) 内, 或者训练时未提供随机数生成器.
    """
    if not 0.0 <= p < 1.0:
        raise ConfigError(f'Dropout probability must lie in [0, 1), got {p}.')
    x = _as_tensor(x)
    if not training or p == 0.0:
        return x
    if rng is None:
        raise ConfigError('Dropout in training mode needs an explicit random generator.')
    scale = (rng.random(x.shape) >= p) / (1.0 - p)
    return _emit(x.data * scale, (x,), lambda g: (g * scale,))

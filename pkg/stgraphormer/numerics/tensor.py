import threading
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import NumericError, ShapeError


ArrayLike = Union[np.ndarray, float, int, Sequence[float]]
BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


class Tensor:
    """64 位稠密张量, 反向模式自动微分的基本单元.

    叶子张量 (用户创建, ``requires_grad=True``) 的梯度累加在 ``grad`` 中, 直到调用 ``zero_grad()``.
    由算子产生的中间张量只在 ``Tape`` 上记录, 其梯度在反向传播时临时保存.
    """

    # 让 numpy 在 ``ndarray + Tensor`` 时让位给 Tensor 的反向运算符
    __array_priority__ = 1000

    def __init__(self, data: ArrayLike, requires_grad: bool = False, name: str = '') -> None:
        """初始化 Tensor.

        Args:
            data (ArrayLike): 张量数据, 会被复制为 float64 数组.
            requires_grad (bool, optional): 是否需要梯度. 默认为 False.
            name (str, optional): 名称, 仅用于日志与检查点. 默认为空.
        """
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._tape: Optional['Tape'] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        """是否为叶子张量, 即不是由某个已记录的算子产生."""
        return self._tape is None

    def item(self) -> float:
        return float(self.data.item())

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> 'Tensor':
        self.grad = None
        return self

    def __repr__(self) -> str:
        label = f' {self.name!r}' if self.name else ''
        return f'Tensor{label}(shape={self.shape}, requires_grad={self.requires_grad})'

    # 运算符重载, 实现位于 ops 模块, 此处延迟导入以避免循环依赖
    def __add__(self, other):
        from . import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from . import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from . import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from . import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from . import ops
        return ops.mul(self, other)

    def __rmul__(self, other):
        from . import ops
        return ops.mul(other, self)

    def __truediv__(self, other):
        from . import ops
        return ops.div(self, other)

    def __neg__(self):
        from . import ops
        return ops.neg(self)

    def __matmul__(self, other):
        from . import ops
        return ops.matmul(self, other)

    def sum(self, axis=None, keepdims: bool = False) -> 'Tensor':
        from . import ops
        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> 'Tensor':
        from . import ops
        return ops.mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape) -> 'Tensor':
        from . import ops
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, *axes) -> 'Tensor':
        from . import ops
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return ops.transpose(self, axes)


class _Node:
    """Tape 上的一条记录: 一次原语调用的输入, 输出与反向函数."""

    __slots__ = ('inputs', 'output', 'backward_fn')

    def __init__(self, inputs: Tuple[Tensor, ...], output: Tensor, backward_fn: BackwardFn) -> None:
        self.inputs = inputs
        self.output = output
        self.backward_fn = backward_fn


_local = threading.local()


def current_tape() -> Optional['Tape']:
    """当前线程正在记录的 Tape, 没有时返回 None."""
    stack = getattr(_local, 'stack', None)
    return stack[-1] if stack else None


class Tape:
    """计算记录带, 按拓扑顺序保存原语调用.

    Tape 只属于创建它的线程; 不同线程可以各自持有 Tape 并发地前向与反向.
    通过 with 语句激活, 激活期间产生的需要梯度的算子输出都会被记录.
    """

    def __init__(self) -> None:
        self._nodes: List[_Node] = []

    def __enter__(self) -> 'Tape':
        if not hasattr(_local, 'stack'):
            _local.stack = []
        _local.stack.append(self)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        _local.stack.pop()

    def __len__(self) -> int:
        return len(self._nodes)

    def record(self, inputs: Tuple[Tensor, ...], output: Tensor, backward_fn: BackwardFn) -> None:
        output.requires_grad = True
        output._tape = self
        self._nodes.append(_Node(inputs, output, backward_fn))

    def backward(self, loss: Tensor) -> None:
        """从标量 ``loss`` 开始反向传播, 逆序访问每条记录恰好一次."""
        if loss.size != 1:
            raise ShapeError(f'backward() needs a scalar loss, got shape {loss.shape}.')
        if loss._tape is not self:
            raise NumericError('Loss tensor is not recorded on this tape.')

        pending = {id(loss): np.ones_like(loss.data)}
        for node in reversed(self._nodes):
            grad_out = pending.pop(id(node.output), None)
            if grad_out is None:
                continue
            grads_in = node.backward_fn(grad_out)
            for tensor, grad in zip(node.inputs, grads_in):
                if grad is None or not tensor.requires_grad:
                    continue
                if tensor.is_leaf:
                    tensor.grad = grad.copy() if tensor.grad is None else tensor.grad + grad
                else:
                    key = id(tensor)
                    pending[key] = grad if key not in pending else pending[key] + grad


def backward(loss: Tensor) -> None:
    """对记录在 Tape 上的标量 ``loss`` 求梯度, 结果累加到所有叶子张量的 ``grad``.

    Raises:
        ShapeError: 如果 ``loss`` 不是标量.
        NumericError: 如果 ``loss`` 没有记录在任何 Tape 上.
    """
    if loss.size != 1:
        raise ShapeError(f'backward() needs a scalar loss, got shape {loss.shape}.')
    if loss._tape is None:
        raise NumericError('Loss tensor is not recorded on any tape; run the forward pass inside `with Tape():`.')
    loss._tape.backward(loss)

from typing import Callable, Mapping, Sequence, Union

import numpy as np

from ..errors import NumericError
from ..utils import get_logger
from .tensor import Tape, Tensor, backward


Params = Union[Mapping[str, Tensor], Sequence[Tensor]]

logger = get_logger('stgraphormer.numerics.gradcheck')


def _as_items(params: Params):
    if isinstance(params, Mapping):
        return list(params.items())
    return [(t.name or f'param_{i}', t) for i, t in enumerate(params)]


def finite_difference_check(f: Callable[[Params], Tensor], params: Params, h: float = 1e-5) -> float:
    """用中心差分校验解析梯度.

    对每个参数的每个坐标 θ 比较解析梯度 a 与 (f(θ+h) − f(θ−h)) / 2h 得到的数值梯度 n,
    返回 |a − n| / max(1, |a|, |n|) 的最大值. 参数数据会被原地扰动, 结束后恢复.

    Args:
        f (Callable[[Params], Tensor]): 参数到标量的确定性函数 (需要关闭 dropout).
        params (Params): 待校验的叶子张量, 可以是名称映射或序列.
        h (float, optional): 差分步长. 默认为 1e-5.

    Returns:
        float: 最大相对误差.

    Raises:
        NumericError: 如果 f 对相同输入给出不同结果.
    """
    items = _as_items(params)
    for _, tensor in items:
        tensor.requires_grad = True
        tensor.zero_grad()

    with Tape():
        loss = f(params)
        backward(loss)
    analytic = {name: (t.grad if t.grad is not None else np.zeros_like(t.data)).copy() for name, t in items}

    # 确定性检查: 两次无记录前向必须逐位一致
    first, second = f(params).item(), f(params).item()
    if first != second or first != loss.item():
        raise NumericError(f'Function under check is not deterministic ({first!r} vs {second!r}).')

    worst, worst_at = 0.0, None
    for name, tensor in items:
        flat = tensor.data.reshape(-1)
        grad = analytic[name].reshape(-1)
        for i in range(flat.size):
            origin = flat[i]
            flat[i] = origin + h
            f_plus = f(params).item()
            flat[i] = origin - h
            f_minus = f(params).item()
            flat[i] = origin

            numeric = (f_plus - f_minus) / (2.0 * h)
            error = abs(grad[i] - numeric) / max(1.0, abs(grad[i]), abs(numeric))
            if error > worst:
                worst, worst_at = error, (name, i)

    logger.debug(f'Finite difference check: max relative error {worst:.3e} at {worst_at}.')
    return worst

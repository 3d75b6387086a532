from collections import OrderedDict
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

import numpy as np

from ..errors import ShapeError
from ..graph import TokenMode
from ..numerics import Tensor
from .config import ModelConfig
from .structure import GraphMaxima


# 名称后缀到参数类别的约定
_LINEAR_SUFFIXES = ('.w0', '.wq', '.wk', '.wv', '.wo', '.w1', '.w2')
_TABLE_PREFIXES = ('embed.z', 'embed.pos', 'embed.cls', 'embed.graph', 'bias.spatial')


def parameter_shapes(config: ModelConfig, maxima: GraphMaxima) -> 'OrderedDict[str, Tuple[int, ...]]':
    """按稳定顺序列出所有参数的名称与形状, 只由配置与图统计量决定."""
    d, ffn = config.d, config.ffn_dim
    shapes: 'OrderedDict[str, Tuple[int, ...]]' = OrderedDict()

    shapes['embed.w0'] = (config.channels, d)
    if maxima.directed:
        shapes['embed.z_in'] = (maxima.max_in + 1, d)
        shapes['embed.z_out'] = (maxima.max_out + 1, d)
    else:
        shapes['embed.z'] = (max(maxima.max_in, maxima.max_out) + 1, d)
    shapes['embed.pos'] = (config.layout().length, d)
    if config.token_mode is TokenMode.CLS:
        shapes['embed.cls'] = (1, d)
    elif config.token_mode is TokenMode.GRAPH:
        shapes['embed.graph'] = (1, d)
    shapes['bias.spatial'] = (maxima.num_buckets, config.heads)

    for j in range(config.layers):
        shapes[f'enc.{j}.ln1.gamma'] = (d,)
        shapes[f'enc.{j}.ln1.beta'] = (d,)
        for name in ('wq', 'wk', 'wv', 'wo'):
            shapes[f'enc.{j}.attn.{name}'] = (d, d)
        shapes[f'enc.{j}.ln2.gamma'] = (d,)
        shapes[f'enc.{j}.ln2.beta'] = (d,)
        shapes[f'enc.{j}.ffn.w1'] = (d, ffn)
        shapes[f'enc.{j}.ffn.b1'] = (ffn,)
        shapes[f'enc.{j}.ffn.w2'] = (ffn, d)
        shapes[f'enc.{j}.ffn.b2'] = (d,)

    if config.flags.final_norm:
        shapes['final_norm.gamma'] = (d,)
        shapes['final_norm.beta'] = (d,)
    shapes['head.w1'] = (d, d // 2)
    shapes['head.b1'] = (d // 2,)
    shapes['head.w2'] = (d // 2, config.out_channels)
    shapes['head.b2'] = (config.out_channels,)
    return shapes


def count_parameters(config: ModelConfig, maxima: GraphMaxima) -> int:
    return int(sum(np.prod(shape) for shape in parameter_shapes(config, maxima).values()))


def is_linear_weight(name: str) -> bool:
    return name.endswith(_LINEAR_SUFFIXES)


def is_embedding_table(name: str) -> bool:
    return name.startswith(_TABLE_PREFIXES)


def decays_weight(name: str) -> bool:
    """只有线性层权重参与权重衰减; 偏置, 归一化与嵌入/偏置表不参与."""
    return is_linear_weight(name)


def layer_of(name: str) -> Optional[int]:
    """参数所属的层: 编码器第 j 层为 j, 输入嵌入与各类编码为 -1, 末端归一化与预测头为 None."""
    if name.startswith('enc.'):
        return int(name.split('.')[1])
    if name.startswith(('embed.', 'bias.')):
        return -1
    return None


class ParameterSet(Mapping):
    """模型全部可学习张量的有序集合, 以稳定名称 (例如 ``enc.3.ffn.w1``) 索引."""

    def __init__(self, tensors: 'OrderedDict[str, Tensor]') -> None:
        self._tensors = OrderedDict(tensors)
        for name, tensor in self._tensors.items():
            tensor.name = name
            tensor.requires_grad = True

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def count(self) -> int:
        """参数总数."""
        return int(sum(t.size for t in self._tensors.values()))

    def zero_grad(self) -> 'ParameterSet':
        for tensor in self._tensors.values():
            tensor.zero_grad()
        return self

    def grads(self) -> Dict[str, np.ndarray]:
        """各参数的梯度, 没有梯度的参数返回全零."""
        return {name: (t.grad if t.grad is not None else np.zeros_like(t.data)) for name, t in self._tensors.items()}

    def arrays(self) -> 'OrderedDict[str, np.ndarray]':
        return OrderedDict((name, t.data) for name, t in self._tensors.items())

    def snapshot(self) -> 'OrderedDict[str, np.ndarray]':
        return OrderedDict((name, t.data.copy()) for name, t in self._tensors.items())

    def load(self, arrays: Mapping[str, np.ndarray]) -> 'ParameterSet':
        """原地载入数组, 名称与形状必须完全一致.

        Raises:
            ShapeError: 如果名称集合或任一形状不一致.
        """
        if set(arrays) != set(self._tensors):
            missing = sorted(set(self._tensors) - set(arrays))
            extra = sorted(set(arrays) - set(self._tensors))
            raise ShapeError(f'Parameter names differ: missing {missing}, unexpected {extra}.')
        for name, tensor in self._tensors.items():
            array = np.asarray(arrays[name], dtype=np.float64)
            if array.shape != tensor.shape:
                raise ShapeError(f'Parameter {name} has shape {tensor.shape}, got {array.shape}.')
            tensor.data[...] = array
        return self

    @classmethod
    def from_arrays(cls, arrays: Mapping[str, np.ndarray]) -> 'ParameterSet':
        return cls(OrderedDict((name, Tensor(array)) for name, array in arrays.items()))

    def names(self) -> List[str]:
        return list(self._tensors)


def init_parameters(config: ModelConfig, maxima: GraphMaxima, seed: int) -> ParameterSet:
    """按种子确定性地初始化参数.

    线性层权重取 uniform(±√(6/(fan_in+fan_out))); 嵌入表与空间偏置表取 normal(0, 0.02),
    其中偏置表的不可达行与特殊 token 行置 0; 偏置与 β 为 0, γ 为 1.
    """
    rng = np.random.default_rng([seed, 0])
    tensors: 'OrderedDict[str, Tensor]' = OrderedDict()

    for name, shape in parameter_shapes(config, maxima).items():
        if is_linear_weight(name):
            limit = np.sqrt(6.0 / (shape[0] + shape[1]))
            data = rng.uniform(-limit, limit, size=shape)
        elif is_embedding_table(name):
            data = rng.normal(0.0, 0.02, size=shape)
            if name == 'bias.spatial':
                data[maxima.max_spd + 1:] = 0.0
        elif name.endswith('.gamma'):
            data = np.ones(shape)
        else:
            data = np.zeros(shape)
        tensors[name] = Tensor(data)
    return ParameterSet(tensors)

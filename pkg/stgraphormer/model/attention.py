import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .. import numerics as nx
from ..errors import ShapeError
from ..graph import SpatialBiasIndex
from ..numerics import Tensor
from .config import ModelConfig
from .parameters import ParameterSet


@dataclass
class AttentionTrace:
    """单个样本各层的 softmax 后注意力, ``layers[j]`` 形状为 (heads, l, l)."""
    layers: List[np.ndarray] = field(default_factory=list)

    @staticmethod
    def split(batched: List[np.ndarray]) -> List['AttentionTrace']:
        """把按层记录的 (B, heads, l, l) 数组拆成逐样本的 AttentionTrace."""
        if not batched:
            return []
        return [AttentionTrace([layer[b] for layer in batched]) for b in range(batched[0].shape[0])]


def spatial_bias(params: ParameterSet, bias_index: SpatialBiasIndex) -> Tensor:
    """按桶索引展开偏置表, 得到 (heads, l, l) 的加性偏置."""
    table = params['bias.spatial']
    return nx.transpose(nx.take(table, bias_index.buckets, axis=0), (2, 0, 1))


def _split_heads(x: Tensor, heads: int) -> Tensor:
    batch, length, d = x.shape
    return nx.transpose(nx.reshape(x, (batch, length, heads, d // heads)), (0, 2, 1, 3))


def biased_multihead_attention(H: Tensor,
                               bias_index: SpatialBiasIndex,
                               params: ParameterSet,
                               layer: int,
                               config: ModelConfig,
                               trace: Optional[List[np.ndarray]] = None) -> Tensor:
    """带最短路径偏置的双向多头自注意力.

    每个头 A = Q·Kᵀ/√d_K + B[bucket(p, q)], 输出为 concat_h(softmax(A_h)·V_h)·W_O.
    给出 ``trace`` 时追加本层的 softmax 结果 (B, heads, l, l).

    Raises:
        ShapeError: 如果序列长度与偏置索引的布局不一致.
    """
    batch, length, d = H.shape
    if length != bias_index.layout.length or d != config.d:
        raise ShapeError(f'Attention input {H.shape} does not match layout length {bias_index.layout.length} '
                         f'and width {config.d}.')
    prefix = f'enc.{layer}.attn'
    heads = config.heads

    q = _split_heads(nx.matmul(H, params[f'{prefix}.wq']), heads)
    k = _split_heads(nx.matmul(H, params[f'{prefix}.wk']), heads)
    v = _split_heads(nx.matmul(H, params[f'{prefix}.wv']), heads)

    scores = nx.matmul(q, nx.transpose(k, (0, 1, 3, 2))) / math.sqrt(config.head_dim)
    if config.flags.use_spatial_bias:
        scores = scores + spatial_bias(params, bias_index)
    weights = nx.softmax_rows(scores)
    if trace is not None:
        trace.append(weights.data)

    context = nx.reshape(nx.transpose(nx.matmul(weights, v), (0, 2, 1, 3)), (batch, length, d))
    return nx.matmul(context, params[f'{prefix}.wo'])

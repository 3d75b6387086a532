from dataclasses import dataclass
from typing import Union

import numpy as np

from .. import numerics as nx
from ..errors import ShapeError
from ..graph import DegreeVector, TokenLayout, TokenMode
from ..numerics import Tensor
from .config import ModelConfig
from .parameters import ParameterSet


@dataclass
class TokenSequence:
    """展平后的隐藏状态 H ∈ (B, l, d) 及其布局."""
    H: Tensor
    layout: TokenLayout


def centrality_encoding(params: ParameterSet, degrees: DegreeVector) -> Tensor:
    """每个节点的中心性编码 z⁻_{deg⁻(v)} + z⁺_{deg⁺(v)}, 形状 (N, d); 无向图只用一张表.

    Raises:
        ShapeError: 如果某个度超出编码表大小.
    """
    if 'embed.z' in params:
        table = params['embed.z']
        if degrees.in_deg.max(initial=0) >= table.shape[0]:
            raise ShapeError(f'Degree {degrees.in_deg.max()} exceeds the centrality table size {table.shape[0]}.')
        return nx.take(table, degrees.in_deg, axis=0)

    z_in, z_out = params['embed.z_in'], params['embed.z_out']
    if degrees.in_deg.max(initial=0) >= z_in.shape[0] or degrees.out_deg.max(initial=0) >= z_out.shape[0]:
        raise ShapeError(f'Degrees (in {degrees.max_in}, out {degrees.max_out}) exceed the centrality tables '
                         f'({z_in.shape[0]}, {z_out.shape[0]}).')
    return nx.take(z_in, degrees.in_deg, axis=0) + nx.take(z_out, degrees.out_deg, axis=0)


def embed_inputs(X: Union[np.ndarray, Tensor],
                 params: ParameterSet,
                 config: ModelConfig,
                 degrees: DegreeVector,
                 layout: TokenLayout) -> TokenSequence:
    """把 (B, T′, N, C) 的输入映射为 (B, l, d) 的初始 token 序列.

    h⁰_{t,i} = X_{t,i}·W0 + z⁻_{deg⁻(v_i)} + z⁺_{deg⁺(v_i)} + p_{t,i}; 开关关闭的编码项不参与求和.
    特殊 token 按布局插入, 其位置编码取自同一张位置表.

    Raises:
        ShapeError: 如果输入形状与配置不一致.
    """
    X = X if isinstance(X, Tensor) else Tensor(X)
    expected = (config.input_steps, config.num_nodes, config.channels)
    if X.ndim != 4 or X.shape[1:] != expected:
        raise ShapeError(f'Input must have shape (B, {expected[0]}, {expected[1]}, {expected[2]}), got {X.shape}.')
    batch, steps, nodes, d = X.shape[0], config.input_steps, config.num_nodes, config.d

    h = nx.matmul(X, params['embed.w0'])
    if config.flags.use_centrality:
        h = h + centrality_encoding(params, degrees)

    if layout.mode is TokenMode.NONE:
        h = nx.reshape(h, (batch, steps * nodes, d))
    elif layout.mode is TokenMode.CLS:
        token = nx.broadcast_to(nx.reshape(params['embed.cls'], (1, 1, d)), (batch, 1, d))
        h = nx.concat([token, nx.reshape(h, (batch, steps * nodes, d))], axis=1)
    else:
        token = nx.broadcast_to(nx.reshape(params['embed.graph'], (1, 1, 1, d)), (batch, steps, 1, d))
        h = nx.reshape(nx.concat([token, h], axis=2), (batch, steps * (nodes + 1), d))

    if config.flags.use_positional:
        h = h + params['embed.pos']
    return TokenSequence(H=h, layout=layout)

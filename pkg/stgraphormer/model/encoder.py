from typing import List, Optional

import numpy as np

from .. import numerics as nx
from ..graph import SpatialBiasIndex
from ..numerics import Tensor
from .attention import biased_multihead_attention
from .config import ModelConfig
from .parameters import ParameterSet


def feed_forward(x: Tensor, params: ParameterSet, layer: int) -> Tensor:
    """FFN(x) = gelu(x·W1 + b1)·W2 + b2."""
    prefix = f'enc.{layer}.ffn'
    hidden = nx.gelu(nx.matmul(x, params[f'{prefix}.w1']) + params[f'{prefix}.b1'])
    return nx.matmul(hidden, params[f'{prefix}.w2']) + params[f'{prefix}.b2']


def encoder_block(H: Tensor,
                  bias_index: SpatialBiasIndex,
                  params: ParameterSet,
                  layer: int,
                  config: ModelConfig,
                  training: bool = False,
                  rng: Optional[np.random.Generator] = None,
                  trace: Optional[List[np.ndarray]] = None) -> Tensor:
    """Pre-LN 编码器块.

    u = H + dropout(Attn(LN₁(H))); H′ = u + dropout(FFN(LN₂(u))).
    """
    prefix = f'enc.{layer}'
    eps = config.ln_eps

    normed = nx.layer_norm(H, params[f'{prefix}.ln1.gamma'], params[f'{prefix}.ln1.beta'], eps)
    attended = biased_multihead_attention(normed, bias_index, params, layer, config, trace)
    u = H + nx.dropout(attended, config.dropout, training, rng)

    normed = nx.layer_norm(u, params[f'{prefix}.ln2.gamma'], params[f'{prefix}.ln2.beta'], eps)
    return u + nx.dropout(feed_forward(normed, params, layer), config.dropout, training, rng)

from .config import EncodingFlags, ModelConfig
from .structure import GraphMaxima, GraphStructure
from .parameters import (ParameterSet, parameter_shapes, count_parameters, init_parameters,
                         is_linear_weight, is_embedding_table, decays_weight, layer_of)
from .embedding import TokenSequence, centrality_encoding, embed_inputs
from .attention import AttentionTrace, spatial_bias, biased_multihead_attention
from .encoder import feed_forward, encoder_block
from .network import prediction_head, forward, TGraphormer


__all__ = [
    'EncodingFlags',
    'ModelConfig',
    'GraphMaxima',
    'GraphStructure',
    'ParameterSet',
    'parameter_shapes',
    'count_parameters',
    'init_parameters',
    'is_linear_weight',
    'is_embedding_table',
    'decays_weight',
    'layer_of',
    'TokenSequence',
    'centrality_encoding',
    'embed_inputs',
    'AttentionTrace',
    'spatial_bias',
    'biased_multihead_attention',
    'feed_forward',
    'encoder_block',
    'prediction_head',
    'forward',
    'TGraphormer',
]

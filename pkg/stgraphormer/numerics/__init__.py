from .tensor import Tensor, Tape, backward, current_tape
from .ops import (
    add, sub, mul, div, neg, abs, where,
    reshape, transpose, broadcast_to, concat, take,
    sum, mean,
    matmul, softmax_rows, layer_norm, gelu, dropout,
)
from .gradcheck import finite_difference_check


__all__ = [
    'Tensor',
    'Tape',
    'backward',
    'current_tape',
    'add',
    'sub',
    'mul',
    'div',
    'neg',
    'abs',
    'where',
    'reshape',
    'transpose',
    'broadcast_to',
    'concat',
    'take',
    'sum',
    'mean',
    'matmul',
    'softmax_rows',
    'layer_norm',
    'gelu',
    'dropout',
    'finite_difference_check',
]

from .spec import GraphSpec
from .adjacency import WeightedAdjacency, build_adjacency
from .degrees import DegreeVector, compute_degrees
from .spd import UNREACHABLE, SpdMatrix, compute_spd
from .layout import TokenMode, TokenLayout
from .bias_index import SpatialBiasIndex, build_bias_index
from .io import read_distances_csv, write_distances_csv, write_matrix_csv, read_matrix_csv


__all__ = [
    'GraphSpec',
    'WeightedAdjacency',
    'build_adjacency',
    'DegreeVector',
    'compute_degrees',
    'UNREACHABLE',
    'SpdMatrix',
    'compute_spd',
    'TokenMode',
    'TokenLayout',
    'SpatialBiasIndex',
    'build_bias_index',
    'read_distances_csv',
    'write_distances_csv',
    'write_matrix_csv',
    'read_matrix_csv',
]

import numpy as np

from ..utils import get_logger
from .spec import GraphSpec


logger = get_logger('stgraphormer.graph.adjacency')


class WeightedAdjacency:
    """阈值高斯核加权邻接矩阵, 所有元素位于 [0, 1]."""

    def __init__(self, matrix: np.ndarray, directed: bool = True) -> None:
        self.matrix = np.asarray(matrix, dtype=np.float64)
        self.directed = directed

    @property
    def num_nodes(self) -> int:
        return self.matrix.shape[0]

    def binarized(self) -> np.ndarray:
        """去掉自环后的二值邻接矩阵, 度与最短路径都基于它计算."""
        binary = self.matrix > 0
        np.fill_diagonal(binary, False)
        return binary


def build_adjacency(spec: GraphSpec) -> WeightedAdjacency:
    """按阈值高斯核构造邻接矩阵.

    W[i][j] = exp(−dist(i, j)² / σ²), 当 dist(i, j) ≤ κ; 否则 (或没有记录距离) 为 0.
    无向图中 (i, j) 与 (j, i) 取两个方向记录中较大的权重, 保证矩阵对称.

    Args:
        spec (GraphSpec): 图描述, 构造时已经校验过 σ > 0 与距离有限.

    Returns:
        WeightedAdjacency: 加权邻接矩阵.
    """
    n = spec.num_nodes
    weights = np.exp(-np.square(spec.dists / spec.sigma))
    weights = np.where(spec.dists <= spec.kappa, weights, 0.0)

    matrix = np.zeros((n, n), dtype=np.float64)
    # 重复记录取较大的权重; 无向图中两个方向合并为同一个权重
    np.maximum.at(matrix, (spec.sources, spec.targets), weights)
    if not spec.directed:
        matrix = np.maximum(matrix, matrix.T)
    adjacency = WeightedAdjacency(matrix, directed=spec.directed)
    edges = int(adjacency.binarized().sum())
    if edges == 0:
        logger.warning(f'No distance is within kappa={spec.kappa}; the graph is fully disconnected.')
    else:
        logger.debug(f'Adjacency has {edges} directed edges over {n} nodes.')
    return adjacency

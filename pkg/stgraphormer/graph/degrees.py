import numpy as np

from .adjacency import WeightedAdjacency


class DegreeVector:
    """节点的入度与出度 (基于去自环的二值邻接矩阵)."""

    def __init__(self, in_deg: np.ndarray, out_deg: np.ndarray, directed: bool = True) -> None:
        self.in_deg = np.asarray(in_deg, dtype=np.int64)
        self.out_deg = np.asarray(out_deg, dtype=np.int64)
        self.directed = directed

    @property
    def max_in(self) -> int:
        return int(self.in_deg.max(initial=0))

    @property
    def max_out(self) -> int:
        return int(self.out_deg.max(initial=0))


def compute_degrees(adjacency: WeightedAdjacency) -> DegreeVector:
    """out_deg[i] 为第 i 行非零非对角元素个数, in_deg[j] 为第 j 列非零非对角元素个数."""
    binary = adjacency.binarized()
    return DegreeVector(in_deg=binary.sum(axis=0),
                        out_deg=binary.sum(axis=1),
                        directed=adjacency.directed)

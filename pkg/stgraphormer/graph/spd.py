from collections import deque
from concurrent.futures import ThreadPoolExecutor
from typing import List

import numpy as np

from ..utils import thread_limit
from .adjacency import WeightedAdjacency


# 不可达节点对的哨兵值
UNREACHABLE = -1


class SpdMatrix:
    """以跳数计的最短路径距离矩阵, 不可达处为 ``UNREACHABLE``."""

    def __init__(self, spd: np.ndarray) -> None:
        self.spd = np.asarray(spd, dtype=np.int64)

    @property
    def num_nodes(self) -> int:
        return self.spd.shape[0]

    @property
    def max_spd(self) -> int:
        """最大的有限距离."""
        finite = self.spd[self.spd != UNREACHABLE]
        return int(finite.max(initial=0))

    @property
    def reachable(self) -> np.ndarray:
        return self.spd != UNREACHABLE


def _bfs_row(source: int, neighbours: List[np.ndarray]) -> np.ndarray:
    row = np.full(len(neighbours), UNREACHABLE, dtype=np.int64)
    row[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in neighbours[u]:
            if row[v] == UNREACHABLE:
                row[v] = row[u] + 1
                queue.append(v)
    return row


def compute_spd(adjacency: WeightedAdjacency) -> SpdMatrix:
    """以单位边长在二值邻接上计算所有节点对的最短跳数, 有向图中尊重边方向.

    每个源点独立做一次 BFS; 设置 ``ST_GRAPHORMER_THREADS`` 后按源点并行,
    结果按源点顺序组装, 与顺序执行逐位一致.
    """
    binary = adjacency.binarized()
    neighbours = [np.flatnonzero(binary[u]) for u in range(binary.shape[0])]
    sources = range(binary.shape[0])

    workers = thread_limit()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda s: _bfs_row(s, neighbours), sources))
    else:
        rows = [_bfs_row(s, neighbours) for s in sources]
    return SpdMatrix(np.stack(rows) if rows else np.zeros((0, 0), dtype=np.int64))

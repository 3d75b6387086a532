import numpy as np

from ..errors import ConfigError
from .layout import TokenLayout
from .spd import UNREACHABLE, SpdMatrix


class SpatialBiasIndex:
    """token 位置对到空间偏置桶的索引表.

    桶 s ∈ [0, max_spd] 对应最短路径距离 s, ``max_spd + 1`` 为不可达桶,
    ``max_spd + 2`` 为任一端是特殊 token 的节点对, 共 ``max_spd + 3`` 个桶.
    """

    def __init__(self, buckets: np.ndarray, max_spd: int, layout: TokenLayout) -> None:
        self.buckets = np.asarray(buckets, dtype=np.int64)
        self.max_spd = int(max_spd)
        self.layout = layout

    @property
    def num_buckets(self) -> int:
        return self.max_spd + 3

    @property
    def unreachable_bucket(self) -> int:
        return self.max_spd + 1

    @property
    def special_bucket(self) -> int:
        return self.max_spd + 2

    def bucket(self, p: int, q: int) -> int:
        return int(self.buckets[p, q])


def build_bias_index(spd: SpdMatrix, layout: TokenLayout) -> SpatialBiasIndex:
    """为 layout 中所有有序位置对分配偏置桶.

    桶只取决于两端的节点以及是否为特殊 token, 与时间下标无关.

    Raises:
        ConfigError: 如果 layout 的节点数与 SPD 矩阵不一致.
    """
    if layout.num_nodes != spd.num_nodes:
        raise ConfigError(f'Token layout has {layout.num_nodes} nodes but the SPD matrix has {spd.num_nodes}.')

    max_spd = spd.max_spd
    node_buckets = np.where(spd.reachable, spd.spd, max_spd + 1)

    nodes = layout.node_of
    special = nodes < 0
    safe = np.where(special, 0, nodes)
    buckets = node_buckets[np.ix_(safe, safe)]
    buckets[special, :] = max_spd + 2
    buckets[:, special] = max_spd + 2
    return SpatialBiasIndex(buckets, max_spd, layout)

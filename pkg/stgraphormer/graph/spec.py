from typing import List, Optional, Tuple

import numpy as np

from ..errors import ConfigError


class GraphSpec:
    """传感器网络的描述: 节点数, 是否有向, 带道路距离的边列表, 阈值 κ 与核宽 σ.

    σ 必须等于所列距离的总体标准差, 构造时会重新计算并校验.
    """

    def __init__(self,
                 num_nodes: int,
                 sources: np.ndarray,
                 targets: np.ndarray,
                 dists: np.ndarray,
                 kappa: float,
                 sigma: float,
                 directed: bool = True) -> None:
        """初始化 GraphSpec.

        Args:
            num_nodes (int): 节点数 N.
            sources (np.ndarray): 每条边的起点编号, 取值 [0, N).
            targets (np.ndarray): 每条边的终点编号, 取值 [0, N).
            dists (np.ndarray): 每条边的道路距离, 非负有限实数.
            kappa (float): 距离阈值 κ, 超过该距离的边权为 0.
            sigma (float): 高斯核宽度 σ.
            directed (bool, optional): 是否为有向图. 默认为 True.

        Raises:
            ConfigError: 如果任一不变量不成立.
        """
        self.num_nodes = int(num_nodes)
        self.sources = np.asarray(sources, dtype=np.int64)
        self.targets = np.asarray(targets, dtype=np.int64)
        self.dists = np.asarray(dists, dtype=np.float64)
        self.kappa = float(kappa)
        self.sigma = float(sigma)
        self.directed = bool(directed)
        self.validate()

    @classmethod
    def from_distances(cls,
                       num_nodes: int,
                       sources: np.ndarray,
                       targets: np.ndarray,
                       dists: np.ndarray,
                       kappa: Optional[float],
                       directed: bool = True) -> 'GraphSpec':
        """由距离列表构造 GraphSpec, σ 取所列距离的总体标准差.

        Raises:
            ConfigError: 如果 κ 未给出, 或距离含非有限值, 或所有距离相同 (σ = 0).
        """
        if kappa is None:
            raise ConfigError('Graph threshold kappa is required and has no default.')
        dists = np.asarray(dists, dtype=np.float64)
        if dists.size == 0:
            raise ConfigError('Distance list is empty.')
        if not np.all(np.isfinite(dists)):
            raise ConfigError('Distance list contains non-finite values.')
        return cls(num_nodes, sources, targets, dists, kappa, float(np.std(dists)), directed)

    @property
    def edges(self) -> List[Tuple[int, int, float]]:
        """(from, to, dist) 三元组列表."""
        return list(zip(self.sources.tolist(), self.targets.tolist(), self.dists.tolist()))

    @property
    def num_edges(self) -> int:
        return int(self.dists.size)

    def validate(self) -> None:
        if self.num_nodes <= 0:
            raise ConfigError(f'Graph needs at least one node, got {self.num_nodes}.')
        if not (self.sources.shape == self.targets.shape == self.dists.shape) or self.dists.ndim != 1:
            raise ConfigError('Edge arrays (from, to, dist) must be one-dimensional and of equal length.')
        for label, ids in (('from', self.sources), ('to', self.targets)):
            if ids.size and (ids.min() < 0 or ids.max() >= self.num_nodes):
                raise ConfigError(f'Edge "{label}" ids must lie in [0, {self.num_nodes}).')
        if not np.all(np.isfinite(self.dists)):
            raise ConfigError('Distance list contains non-finite values.')
        if np.any(self.dists < 0):
            raise ConfigError('Distances must be nonnegative.')
        if not np.isfinite(self.kappa) or self.kappa < 0:
            raise ConfigError(f'Threshold kappa must be a nonnegative real, got {self.kappa}.')
        if not self.sigma > 0:
            raise ConfigError('Kernel width sigma is 0: all listed distances are identical.')

        expected = float(np.std(self.dists))
        if not np.isclose(self.sigma, expected, rtol=1e-9, atol=0.0):
            raise ConfigError(f'Sigma {self.sigma} differs from the standard deviation of the distances ({expected}).')

    def __repr__(self) -> str:
        kind = 'directed' if self.directed else 'undirected'
        return f'GraphSpec(N={self.num_nodes}, M={self.num_edges}, {kind}, kappa={self.kappa}, sigma={self.sigma:.6g})'

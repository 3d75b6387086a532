from enum import Enum
from typing import Optional, Tuple

import numpy as np

from ..errors import ConfigError


class TokenMode(Enum):
    """特殊 token 的插入方式."""
    NONE = 'none'
    CLS = 'cls'
    GRAPH = 'graph'


class TokenLayout:
    """展平序列中 flat index 与 (时间 t, 节点 i) 或特殊 token 之间的映射.

    - NONE: l = T′·N, 位置 t·N + i 为 (t, i).
    - CLS: l = T′·N + 1, 位置 0 为 ``cls``, 位置 1 + t·N + i 为 (t, i).
    - GRAPH: l = T′·(N+1), 位置 t·(N+1) 为第 t 步的 ``graph`` token, 其后 N 个为该步的节点.
    """

    def __init__(self, mode: TokenMode, steps: int, num_nodes: int) -> None:
        if steps <= 0 or num_nodes <= 0:
            raise ConfigError(f'Token layout needs positive steps and nodes, got T\'={steps}, N={num_nodes}.')
        self.mode = TokenMode(mode)
        self.steps = int(steps)
        self.num_nodes = int(num_nodes)

        t, i = np.divmod(np.arange(self.steps * self.num_nodes), self.num_nodes)
        if self.mode is TokenMode.NONE:
            flat = t * self.num_nodes + i
            length = self.steps * self.num_nodes
        elif self.mode is TokenMode.CLS:
            flat = 1 + t * self.num_nodes + i
            length = self.steps * self.num_nodes + 1
        else:
            flat = t * (self.num_nodes + 1) + 1 + i
            length = self.steps * (self.num_nodes + 1)

        self._length = length
        # 非特殊 token 的 flat index, 按 (t, i) 行优先排列
        self._node_positions = flat
        self._time_of = np.full(length, -1, dtype=np.int64)
        self._node_of = np.full(length, -1, dtype=np.int64)
        self._time_of[flat] = t
        self._node_of[flat] = i

    @property
    def length(self) -> int:
        """序列总长度 l."""
        return self._length

    @property
    def node_positions(self) -> np.ndarray:
        """所有节点 token 的 flat index, 顺序为 (t, i) 行优先."""
        return self._node_positions

    @property
    def special_positions(self) -> np.ndarray:
        return np.flatnonzero(self._node_of < 0)

    @property
    def special_mask(self) -> np.ndarray:
        return self._node_of < 0

    @property
    def time_of(self) -> np.ndarray:
        """每个位置的时间下标, 特殊 token 为 -1."""
        return self._time_of

    @property
    def node_of(self) -> np.ndarray:
        """每个位置的节点下标, 特殊 token 为 -1."""
        return self._node_of

    def flat_index(self, t: int, i: int) -> int:
        if not (0 <= t < self.steps and 0 <= i < self.num_nodes):
            raise ConfigError(f'Position (t={t}, i={i}) is outside the {self.steps}x{self.num_nodes} grid.')
        return int(self._node_positions[t * self.num_nodes + i])

    def position(self, flat: int) -> Optional[Tuple[int, int]]:
        """flat index 对应的 (t, i); 特殊 token 返回 None."""
        if self._node_of[flat] < 0:
            return None
        return int(self._time_of[flat]), int(self._node_of[flat])

    def __repr__(self) -> str:
        return f'TokenLayout(mode={self.mode.value}, T\'={self.steps}, N={self.num_nodes}, l={self.length})'

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from ..errors import ConfigError
from .normalizer import Normalizer
from .series import RawSeries
from .time_features import slots_per_day, time_of_day_slots


@dataclass(frozen=True)
class WindowedSample:
    """一个训练实例: 上下文 X ∈ T′×N×C 与目标 Y ∈ T×N×1.

    X 的第 0 通道为归一化速度, 其后为时间槽独热; Y 保持原始单位.
    X 的各行对应时刻 anchor_time−T′+1 … anchor_time, Y 的各行对应 anchor_time+1 … anchor_time+T.
    """
    X: np.ndarray
    Y: np.ndarray
    anchor_time: int


class WindowDataset:
    """按需生成滑动窗口样本的数据集.

    只保存逐时刻的归一化速度, 原始目标与时间槽; 样本在访问时才拼出, 避免 T′ 倍的内存开销.
    """

    def __init__(self,
                 speed: np.ndarray,
                 target: np.ndarray,
                 slots: np.ndarray,
                 num_slots: int,
                 input_steps: int,
                 horizon: int,
                 normalizer: Normalizer,
                 name: str = '') -> None:
        """初始化 WindowDataset.

        Args:
            speed (np.ndarray): L×N 的归一化速度.
            target (np.ndarray): L×N 的原始单位速度.
            slots (np.ndarray): 长度为 L 的时间槽下标.
            num_slots (int): 每日时间槽数.
            input_steps (int): 上下文长度 T′.
            horizon (int): 预测步数 T.
            normalizer (Normalizer): 拟合自训练集的归一化参数.
            name (str, optional): 划分名称. 默认为空.

        Raises:
            ConfigError: 如果序列短于 T′ + T.
        """
        self.speed = np.asarray(speed, dtype=np.float64)
        self.target = np.asarray(target, dtype=np.float64)
        self.slots = np.asarray(slots, dtype=np.int64)
        self.num_slots = int(num_slots)
        self.input_steps = int(input_steps)
        self.horizon = int(horizon)
        self.normalizer = normalizer
        self.name = name

        if self.input_steps <= 0 or self.horizon <= 0:
            raise ConfigError(f'Window sizes must be positive, got T\'={self.input_steps}, T={self.horizon}.')
        if self.speed.shape[0] < self.input_steps + self.horizon:
            raise ConfigError(f'Split {name!r} has {self.speed.shape[0]} rows, fewer than '
                              f'T\'+T = {self.input_steps + self.horizon}.')
        self._eye = np.eye(self.num_slots, dtype=np.float64)

    @property
    def num_nodes(self) -> int:
        return self.speed.shape[1]

    @property
    def channels(self) -> int:
        """输入通道数 C = 1 + 每日时间槽数."""
        return 1 + self.num_slots

    @property
    def anchors(self) -> np.ndarray:
        """所有样本的锚点时刻 t ∈ [T′−1, L−T−1]."""
        return np.arange(self.input_steps - 1, self.speed.shape[0] - self.horizon)

    def __len__(self) -> int:
        return self.speed.shape[0] - self.input_steps - self.horizon + 1

    def __getitem__(self, index: int) -> WindowedSample:
        if not -len(self) <= index < len(self):
            raise IndexError(f'Sample {index} out of range for {len(self)} windows.')
        anchor = int(self.anchors[index])
        X, Y = self.batch([index])
        return WindowedSample(X=X[0], Y=Y[0], anchor_time=anchor)

    def __iter__(self) -> Iterator[WindowedSample]:
        for index in range(len(self)):
            yield self[index]

    def batch(self, indices: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
        """把若干样本堆叠成 (B, T′, N, C) 的输入与 (B, T, N, 1) 的目标."""
        anchors = self.anchors[np.asarray(indices, dtype=np.int64)]
        rows_x = anchors[:, None] + np.arange(-self.input_steps + 1, 1)[None, :]
        rows_y = anchors[:, None] + np.arange(1, self.horizon + 1)[None, :]

        speed = self.speed[rows_x][..., None]
        onehot = self._eye[self.slots[rows_x]][:, :, None, :]
        onehot = np.broadcast_to(onehot, speed.shape[:3] + (self.num_slots,))
        X = np.concatenate([speed, onehot], axis=-1)
        Y = self.target[rows_y][..., None]
        return X, Y


def make_windows(split: RawSeries,
                 input_steps: int = 12,
                 horizon: int = 12,
                 normalizer: Optional[Normalizer] = None,
                 name: str = '') -> WindowDataset:
    """把一个划分切成 L − T′ − T + 1 个滑动窗口样本.

    Raises:
        ConfigError: 如果未给出 normalizer 或序列过短.
    """
    if normalizer is None:
        raise ConfigError('make_windows needs a fitted normalizer.')
    return WindowDataset(speed=normalizer.apply(split.values),
                         target=split.values,
                         slots=time_of_day_slots(split.timestamps, split.sampling_interval),
                         num_slots=slots_per_day(split.sampling_interval),
                         input_steps=input_steps,
                         horizon=horizon,
                         normalizer=normalizer,
                         name=name)


def shuffle_order(count: int, seed: int, epoch: int) -> np.ndarray:
    """训练集每个 epoch 的打乱顺序, 只由 (seed, epoch) 决定."""
    return np.random.default_rng([seed, 1, epoch]).permutation(count)

from pathlib import Path
from typing import Union

from ..utils import load_container, save_container
from .normalizer import Normalizer
from .windows import WindowDataset


PathLike = Union[str, Path]


def save_split_archive(stem: PathLike, dataset: WindowDataset, seed: int, start: str, interval_minutes: float) -> Path:
    """把一个划分的窗口数据持久化为二进制容器与 JSON 清单."""
    arrays = {
        'speed': dataset.speed,
        'target': dataset.target,
        'slot': dataset.slots,
    }
    meta = {
        'split': dataset.name,
        'input_steps': dataset.input_steps,
        'horizon': dataset.horizon,
        'mean': dataset.normalizer.mean,
        'std': dataset.normalizer.std,
        'channels': dataset.channels,
        'slots_per_day': dataset.num_slots,
        'num_nodes': dataset.num_nodes,
        'num_samples': len(dataset),
        'seed': seed,
        'start': start,
        'interval_minutes': interval_minutes,
    }
    return save_container(stem, arrays, meta)


def load_split_archive(stem: PathLike) -> WindowDataset:
    arrays, meta = load_container(stem)
    return WindowDataset(speed=arrays['speed'],
                         target=arrays['target'],
                         slots=arrays['slot'],
                         num_slots=meta['slots_per_day'],
                         input_steps=meta['input_steps'],
                         horizon=meta['horizon'],
                         normalizer=Normalizer(mean=meta['mean'], std=meta['std']),
                         name=meta['split'])

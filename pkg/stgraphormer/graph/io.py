from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import ConfigError
from ..utils import get_logger


logger = get_logger('stgraphormer.graph.io')

PathLike = Union[str, Path]


def read_distances_csv(path: PathLike,
                       id_map: Optional[PathLike] = None,
                       num_nodes: Optional[int] = None) -> Tuple[int, np.ndarray, np.ndarray, np.ndarray]:
    """读取 ``from,to,dist`` 格式的传感器距离表.

    Args:
        path (PathLike): 距离 CSV 路径.
        id_map (Optional[PathLike], optional): 含 ``id`` 列的映射文件, 第 k 行的原始编号映射到节点 k.
            为 None 时 ``from``/``to`` 直接视为 0 起始的节点编号. 默认为 None.
        num_nodes (Optional[int], optional): 节点数. 为 None 时取映射长度或最大编号 + 1. 默认为 None.

    Returns:
        Tuple[int, np.ndarray, np.ndarray, np.ndarray]: 节点数, 起点, 终点, 距离.

    Raises:
        ConfigError: 如果文件缺失或缺少必要的列.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f'Distance file {path} does not exist.')
    frame = pd.read_csv(path)
    missing = {'from', 'to', 'dist'} - set(frame.columns)
    if missing:
        raise ConfigError(f'Distance file {path} lacks columns {sorted(missing)}.')

    if id_map is not None:
        id_map = Path(id_map)
        if not id_map.exists():
            raise ConfigError(f'Sensor id map {id_map} does not exist.')
        ids = pd.read_csv(id_map, dtype={'id': str})['id'].tolist()
        lookup = {raw: k for k, raw in enumerate(ids)}
        src = frame['from'].astype(str).map(lookup)
        dst = frame['to'].astype(str).map(lookup)
        known = src.notna() & dst.notna()
        if not known.all():
            logger.warning(f'Dropped {int((~known).sum())} distance rows referring to sensors outside the id map.')
        frame = frame[known]
        sources, targets = src[known].astype(np.int64).to_numpy(), dst[known].astype(np.int64).to_numpy()
        inferred = len(ids)
    else:
        sources = frame['from'].astype(np.int64).to_numpy()
        targets = frame['to'].astype(np.int64).to_numpy()
        inferred = int(max(sources.max(initial=-1), targets.max(initial=-1))) + 1

    dists = frame['dist'].astype(np.float64).to_numpy()
    return (num_nodes if num_nodes is not None else inferred), sources, targets, dists


def write_distances_csv(path: PathLike, sources: np.ndarray, targets: np.ndarray, dists: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({'from': sources, 'to': targets, 'dist': dists})
    frame.to_csv(path, index=False, float_format='%.17g')
    return path


def write_matrix_csv(path: PathLike, matrix: np.ndarray) -> Path:
    """以行优先, 全精度十进制写出矩阵."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    matrix = np.atleast_2d(matrix)
    fmt = '%d' if np.issubdtype(matrix.dtype, np.integer) else '%.17g'
    np.savetxt(path, matrix, fmt=fmt, delimiter=',')
    return path


def read_matrix_csv(path: PathLike, dtype=np.float64) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=',', dtype=dtype))

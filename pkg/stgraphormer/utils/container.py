"""二进制容器: 一个 ``.bin`` 数据文件加一个 ``.json`` 清单.

数据文件按清单顺序拼接各数组的小端字节, 清单记录每个数组的名称, 类型, 形状与偏移量.
清单以排序后的键写出, 相同输入总是得到字节级一致的文件.
"""
import json
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple, Union

import numpy as np

from ..errors import ConfigError


PathLike = Union[str, Path]

# 仅支持这两种元素类型, 统一写为小端
_DTYPES = {
    'float64': np.dtype('<f8'),
    'int64': np.dtype('<i8'),
}


def _paths(stem: PathLike) -> Tuple[Path, Path]:
    stem = Path(stem)
    return stem.with_suffix('.bin'), stem.with_suffix('.json')


def save_container(stem: PathLike, arrays: Mapping[str, np.ndarray], meta: Mapping[str, Any]) -> Path:
    """写出二进制容器.

    Args:
        stem (PathLike): 文件路径前缀, 会生成 ``<stem>.bin`` 与 ``<stem>.json``.
        arrays (Mapping[str, np.ndarray]): 有序的命名数组, 浮点数组存为 float64, 整数数组存为 int64.
        meta (Mapping[str, Any]): 写入清单的元信息, 必须可被 JSON 序列化.

    Returns:
        Path: 清单文件路径.
    """
    path_bin, path_json = _paths(stem)
    path_bin.parent.mkdir(parents=True, exist_ok=True)

    index = []
    offset = 0
    with open(path_bin, 'wb') as f:
        for name, array in arrays.items():
            array = np.asarray(array)
            kind = 'int64' if np.issubdtype(array.dtype, np.integer) else 'float64'
            raw = np.ascontiguousarray(array, dtype=_DTYPES[kind]).tobytes()
            f.write(raw)
            index.append({'name': name, 'dtype': kind, 'shape': list(array.shape), 'offset': offset})
            offset += len(raw)

    manifest = {'meta': dict(meta), 'tensors': index, 'nbytes': offset}
    with open(path_json, 'w') as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write('\n')
    return path_json


def load_container(stem: PathLike) -> Tuple[Dict[str, np.ndarray], Dict[str, Any]]:
    """读取二进制容器.

    Args:
        stem (PathLike): 文件路径前缀.

    Returns:
        Tuple[Dict[str, np.ndarray], Dict[str, Any]]: 按清单顺序的命名数组, 以及元信息.

    Raises:
        ConfigError: 如果文件缺失或者数据长度与清单不一致.
    """
    path_bin, path_json = _paths(stem)
    if not path_bin.exists() or not path_json.exists():
        raise ConfigError(f'Container {Path(stem)} is missing ({path_bin.name} / {path_json.name}).')

    with open(path_json) as f:
        manifest = json.load(f)
    buffer = path_bin.read_bytes()
    if len(buffer) != manifest['nbytes']:
        raise ConfigError(f'Container {path_bin} holds {len(buffer)} bytes, manifest declares {manifest["nbytes"]}.')

    arrays: Dict[str, np.ndarray] = {}
    for entry in manifest['tensors']:
        dtype = _DTYPES[entry['dtype']]
        count = int(np.prod(entry['shape'], dtype=np.int64))
        flat = np.frombuffer(buffer, dtype=dtype, count=count, offset=entry['offset'])
        arrays[entry['name']] = flat.reshape(entry['shape']).astype(dtype.newbyteorder('='))
    return arrays, manifest['meta']

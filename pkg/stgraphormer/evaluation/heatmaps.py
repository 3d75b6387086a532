import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

from ..errors import ConfigError, ShapeError
from ..graph import TokenLayout, write_matrix_csv
from ..model import AttentionTrace


PathLike = Union[str, Path]


@dataclass
class HeatmapBundle:
    """节点-节点 (N×N) 与时间-时间 (T′×T′) 的平均注意力, 以及可选的逐层版本."""
    node_node: np.ndarray
    time_time: np.ndarray
    node_node_layers: List[np.ndarray] = field(default_factory=list)
    time_time_layers: List[np.ndarray] = field(default_factory=list)

    def write(self, out_dir: PathLike) -> Path:
        """写出 ``node_node.csv``, ``time_time.csv``, 逐层的 ``<kind>/layer_<j>.csv`` 与描述文件布局的 ``heatmaps.json``.

        Returns:
            Path: ``heatmaps.json`` 的路径.
        """
        out_dir = Path(out_dir)
        write_matrix_csv(out_dir / 'node_node.csv', self.node_node)
        write_matrix_csv(out_dir / 'time_time.csv', self.time_time)
        layers = []
        for j, (nn, tt) in enumerate(zip(self.node_node_layers, self.time_time_layers)):
            entry = {'layer': j, 'node_node': f'node_node/layer_{j}.csv', 'time_time': f'time_time/layer_{j}.csv'}
            write_matrix_csv(out_dir / entry['node_node'], nn)
            write_matrix_csv(out_dir / entry['time_time'], tt)
            layers.append(entry)

        manifest = {
            'num_nodes': int(self.node_node.shape[0]),
            'input_steps': int(self.time_time.shape[0]),
            'node_node': 'node_node.csv',
            'time_time': 'time_time.csv',
            'layers': layers,
        }
        path = out_dir / 'heatmaps.json'
        with open(path, 'w') as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
            f.write('\n')
        return path


def _fold(scores: np.ndarray, layout: TokenLayout):
    """去掉特殊 token 的行列, 把 l×l 的得分折叠为 (N×N, T′×T′) 两张平均图."""
    positions = layout.node_positions
    grid = scores[np.ix_(positions, positions)].reshape(layout.steps, layout.num_nodes,
                                                        layout.steps, layout.num_nodes)
    return grid.mean(axis=(0, 2)), grid.mean(axis=(1, 3))


def attention_heatmaps(traces: Sequence[AttentionTrace], layout: TokenLayout, per_layer: bool = False) -> HeatmapBundle:
    """聚合注意力热力图.

    先在样本间平均, 再在层 (及层内的头) 间平均得到 S;
    node_node[i][j] 为所有 (t1, t2) 上 S[(t1,i)][(t2,j)] 的平均, time_time[t1][t2] 为所有 (i, j) 上的平均.
    逐层版本跳过层平均.

    Raises:
        ConfigError: 如果 traces 为空.
        ShapeError: 如果各 trace 的形状不一致或与布局不符.
    """
    if not traces:
        raise ConfigError('Attention heatmaps need at least one trace.')
    try:
        stacked = np.stack([np.stack(trace.layers) for trace in traces])
    except ValueError as e:
        raise ShapeError('Attention traces have inconsistent shapes.') from e
    if stacked.ndim != 5 or stacked.shape[-1] != layout.length or stacked.shape[-2] != layout.length:
        raise ShapeError(f'Attention traces of shape {stacked.shape[1:]} do not match layout length {layout.length}.')

    # (samples, layers, heads, l, l) -> (layers, l, l)
    per_layer_scores = stacked.mean(axis=0).mean(axis=1)
    node_node, time_time = _fold(per_layer_scores.mean(axis=0), layout)
    bundle = HeatmapBundle(node_node=node_node, time_time=time_time)
    if per_layer:
        for scores in per_layer_scores:
            nn, tt = _fold(scores, layout)
            bundle.node_node_layers.append(nn)
            bundle.time_time_layers.append(tt)
    return bundle

from typing import List, Optional, Tuple, Union

import numpy as np

from .. import numerics as nx
from ..dataset import Normalizer, WindowDataset
from ..errors import ShapeError
from ..numerics import Tensor
from ..utils import get_logger
from .attention import AttentionTrace
from .config import ModelConfig
from .embedding import embed_inputs
from .encoder import encoder_block
from .parameters import ParameterSet, init_parameters
from .structure import GraphStructure


logger = get_logger('stgraphormer.model.network')


def prediction_head(H: Tensor, params: ParameterSet) -> Tensor:
    """两层线性头 d → d/2 → C_out, 中间无激活."""
    hidden = nx.matmul(H, params['head.w1']) + params['head.b1']
    return nx.matmul(hidden, params['head.w2']) + params['head.b2']


def forward(X: Union[np.ndarray, Tensor],
            params: ParameterSet,
            config: ModelConfig,
            structure: GraphStructure,
            normalizer: Optional[Normalizer] = None,
            training: bool = False,
            rng: Optional[np.random.Generator] = None,
            trace: Optional[List[np.ndarray]] = None) -> Tensor:
    """T-Graphormer 前向计算.

    输入嵌入 → k 个编码器块 → (可选) 末端层归一化 → 丢弃特殊 token → 预测头 → 反归一化.
    第 j 个时间步上节点 i 的 token 输出即该节点第 j+1 步的预测.

    Args:
        X (Union[np.ndarray, Tensor]): (T′, N, C) 的单个样本或 (B, T′, N, C) 的一批样本.
        params (ParameterSet): 模型参数.
        config (ModelConfig): 网络配置.
        structure (GraphStructure): 度与空间偏置索引, 布局须与配置一致.
        normalizer (Optional[Normalizer], optional): 输出反归一化参数, 为 None 时输出保持归一化单位.
        training (bool, optional): 是否启用 dropout. 默认为 False.
        rng (Optional[np.random.Generator], optional): 训练模式下 dropout 的随机数生成器.
        trace (Optional[List[np.ndarray]], optional): 给出时按层追加 (B, heads, l, l) 的注意力.

    Returns:
        Tensor: 与输入批维度对应的 (T, N, C_out) 或 (B, T, N, C_out) 预测, 原始单位.

    Raises:
        ShapeError: 如果输入或图结构与配置不一致.
    """
    X = X if isinstance(X, Tensor) else Tensor(X)
    single = X.ndim == 3
    if single:
        X = nx.reshape(X, (1,) + X.shape)

    layout = structure.layout
    if layout.mode is not config.token_mode or layout.length != config.layout().length:
        raise ShapeError(f'Graph structure layout {layout} does not match model layout {config.layout()}.')

    H = embed_inputs(X, params, config, structure.degrees, layout).H
    for j in range(config.layers):
        H = encoder_block(H, structure.bias_index, params, j, config, training, rng, trace)
    if config.flags.final_norm:
        H = nx.layer_norm(H, params['final_norm.gamma'], params['final_norm.beta'], config.ln_eps)

    batch = X.shape[0]
    tokens = nx.take(H, layout.node_positions, axis=1)
    out = prediction_head(tokens, params)
    out = nx.reshape(out, (batch, config.horizon, config.num_nodes, config.out_channels))
    if normalizer is not None:
        out = out * normalizer.std + normalizer.mean
    if single:
        out = nx.reshape(out, out.shape[1:])
    return out


class TGraphormer:
    """把配置, 参数, 图结构与归一化参数绑在一起的模型对象.

    Example:
        model = TGraphormer.create(config, structure, normalizer, seed=0)
        pred = model(sample.X)
    """

    def __init__(self,
                 config: ModelConfig,
                 params: ParameterSet,
                 structure: GraphStructure,
                 normalizer: Optional[Normalizer] = None) -> None:
        self.config = config
        self.params = params
        self.structure = structure
        self.normalizer = normalizer

    @classmethod
    def create(cls,
               config: ModelConfig,
               structure: GraphStructure,
               normalizer: Optional[Normalizer] = None,
               seed: int = 0) -> 'TGraphormer':
        params = init_parameters(config, structure.maxima, seed)
        logger.info(f'Model d={config.d} k={config.layers} heads={config.heads} '
                    f'token={config.token_mode.value}, l={config.layout().length}, '
                    f'{params.count()} parameters.')
        return cls(config, params, structure, normalizer)

    def __call__(self,
                 X: Union[np.ndarray, Tensor],
                 training: bool = False,
                 rng: Optional[np.random.Generator] = None,
                 trace: Optional[List[np.ndarray]] = None) -> Tensor:
        return forward(X, self.params, self.config, self.structure, self.normalizer, training, rng, trace)

    def attend(self, X: np.ndarray) -> Tuple[np.ndarray, List[AttentionTrace]]:
        """推理并返回逐样本的注意力记录."""
        layers: List[np.ndarray] = []
        pred = self(X, trace=layers)
        return pred.data, AttentionTrace.split(layers)

    def predict(self, dataset: WindowDataset, batch_size: int = 64) -> np.ndarray:
        """对整个数据集推理, 返回 (S, T, N, C_out) 的原始单位预测."""
        outputs = []
        for start in range(0, len(dataset), batch_size):
            X, _ = dataset.batch(range(start, min(start + batch_size, len(dataset))))
            outputs.append(self(X).data)
        if not outputs:
            return np.zeros((0, self.config.horizon, self.config.num_nodes, self.config.out_channels))
        return np.concatenate(outputs, axis=0)

import numpy as np
import pandas as pd
import pytest

from stgraphormer.dataset import PreparedData, RawSeries, SplitSpec, generate_synthetic, prepare_splits
from stgraphormer.graph import GraphSpec, TokenMode, WeightedAdjacency, build_adjacency
from stgraphormer.model import GraphStructure, ModelConfig, TGraphormer
from stgraphormer.training import TrainConfig


# 2 小时采样, 每日 12 个时间槽, C = 13
TINY_INTERVAL = 120
TINY_STEPS = 3


@pytest.fixture
def path_adjacency() -> WeightedAdjacency:
    """有向图 0→1→2→3→1: 节点 0 从其他节点不可达."""
    spec = GraphSpec.from_distances(4, [0, 1, 2, 3], [1, 2, 3, 1], [1.0, 2.0, 3.0, 1.5], kappa=5.0)
    return build_adjacency(spec)


@pytest.fixture
def tiny_config() -> ModelConfig:
    return ModelConfig(d=8, layers=2, heads=2, ffn_ratio=2, dropout=0.0, token_mode=TokenMode.CLS,
                       input_steps=TINY_STEPS, horizon=TINY_STEPS, num_nodes=4, channels=3)


@pytest.fixture
def tiny_structure(path_adjacency, tiny_config) -> GraphStructure:
    return GraphStructure.build(path_adjacency, tiny_config.layout())


@pytest.fixture
def tiny_series() -> RawSeries:
    rng = np.random.default_rng(7)
    values = rng.uniform(40.0, 70.0, size=(300, 4))
    return RawSeries.regular(values, '2024-01-01', pd.Timedelta(minutes=TINY_INTERVAL))


@pytest.fixture
def tiny_network():
    return generate_synthetic(num_nodes=4, num_steps=300, seed=0, interval_minutes=TINY_INTERVAL)


@pytest.fixture
def tiny_data(tiny_network) -> PreparedData:
    return prepare_splits(tiny_network.series, SplitSpec(), TINY_STEPS, TINY_STEPS)


@pytest.fixture
def tiny_graph_structure(tiny_network, tiny_data):
    """返回 (邻接矩阵, 与 tiny_data 匹配的模型配置)."""
    spec = GraphSpec.from_distances(4, tiny_network.sources, tiny_network.targets, tiny_network.dists, kappa=6.0)
    adjacency = build_adjacency(spec)
    config = ModelConfig(d=8, layers=2, heads=2, ffn_ratio=2, dropout=0.0,
                         input_steps=TINY_STEPS, horizon=TINY_STEPS,
                         num_nodes=4, channels=tiny_data.train.channels)
    return adjacency, config


@pytest.fixture
def tiny_model(tiny_graph_structure, tiny_data) -> TGraphormer:
    adjacency, config = tiny_graph_structure
    structure = GraphStructure.build(adjacency, config.layout())
    return TGraphormer.create(config, structure, tiny_data.normalizer, seed=0)


@pytest.fixture
def tiny_train_config() -> TrainConfig:
    return TrainConfig(epochs=2, warmup_epochs=1, base_lr=2e-3, batch_size=32, dropout=0.0)

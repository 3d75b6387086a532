import pytest

from stgraphormer.dataset import SplitSpec, generate_synthetic, prepare_splits
from stgraphormer.evaluation import apply_ablation, evaluate, evaluate_persistence
from stgraphormer.graph import GraphSpec, build_adjacency
from stgraphormer.model import GraphStructure, ModelConfig, TGraphormer
from stgraphormer.registry import ModelPresets, TrainPresets
from stgraphormer.training import train


pytestmark = pytest.mark.slow


@pytest.fixture(scope='module')
def synthetic():
    network = generate_synthetic(num_nodes=10, num_steps=5000, seed=0)
    data = prepare_splits(network.series, SplitSpec(), 12, 12)
    spec = GraphSpec.from_distances(10, network.sources, network.targets, network.dists, kappa=6.0)
    return data, build_adjacency(spec)


def _micro(data) -> ModelConfig:
    return ModelPresets.MICRO.value.build(input_steps=12, horizon=12, num_nodes=data.train.num_nodes,
                                          channels=data.train.channels)


def _fit(config: ModelConfig, data, adjacency, seed: int = 0):
    train_config = TrainPresets.SYNTH_MICRO.value.build()
    structure = GraphStructure.build(adjacency, config.layout())
    model = TGraphormer.create(config.with_changes(dropout=train_config.dropout), structure, data.normalizer, seed)
    result = train(model, train_config, data, seed=seed, show_progress=False)
    return result.best.build_model(structure)


def test_micro_preset_learns_synthetic_traffic(synthetic):
    data, adjacency = synthetic
    model = _fit(_micro(data), data, adjacency)

    train_report = evaluate(model, data.train)
    assert train_report.longest.mae < 0.1 * data.normalizer.std

    report = evaluate(model, data.test)
    baseline = evaluate_persistence(data.test)
    assert report.at(12).mae <= 0.8 * baseline.at(12).mae


def test_positional_encoding_helps(synthetic):
    data, adjacency = synthetic
    base = _micro(data)
    full = evaluate(_fit(base, data, adjacency), data.test)
    ablated = evaluate(_fit(apply_ablation(base, 'no_positional'), data, adjacency), data.test)
    assert ablated.at(12).mae > full.at(12).mae

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stgraphormer import numerics as nx
from stgraphormer.dataset import Normalizer
from stgraphormer.errors import ConfigError, ShapeError
from stgraphormer.graph import GraphSpec, TokenMode, WeightedAdjacency, build_adjacency
from stgraphormer.model import (GraphMaxima, GraphStructure, ModelConfig, TGraphormer, biased_multihead_attention,
                                centrality_encoding, count_parameters, decays_weight, embed_inputs, encoder_block,
                                forward, init_parameters, layer_of, parameter_shapes)
from stgraphormer.numerics import Tensor, finite_difference_check
from stgraphormer.training import huber_loss


PEMS_BAY_MAXIMA = GraphMaxima(max_in=10, max_out=10, max_spd=20)


def _pems_bay_config(d: int, layers: int, heads: int) -> ModelConfig:
    return ModelConfig(d=d, layers=layers, heads=heads, ffn_ratio=4, input_steps=12, horizon=12,
                       num_nodes=325, channels=289)


def _chain(n: int) -> WeightedAdjacency:
    matrix = np.zeros((n, n))
    for i in range(n - 1):
        matrix[i, i + 1] = 1.0
    return WeightedAdjacency(matrix)


def _zero(params, *names):
    for name in names:
        params[name].data[...] = 0.0


class TestModelConfig:

    def test_heads_must_divide_width(self):
        with pytest.raises(ConfigError):
            ModelConfig(d=10, heads=4)

    def test_horizon_must_match_context(self):
        with pytest.raises(ConfigError):
            ModelConfig(input_steps=12, horizon=6)

    def test_flag_changes(self):
        config = ModelConfig().with_changes(use_positional=False, token_mode=TokenMode.NONE)
        assert not config.flags.use_positional
        assert config.flags.use_centrality
        assert config.token_mode is TokenMode.NONE

    def test_dict_form(self):
        config = ModelConfig(d=16, heads=4, token_mode='graph').with_changes(use_spatial_bias=False)
        assert ModelConfig.from_dict(config.to_dict()) == config


class TestParameters:

    @pytest.mark.parametrize('d, layers, heads, published', [(64, 6, 2, 0.58e6), (128, 6, 4, 1.76e6),
                                                              (192, 8, 6, 4.44e6)])
    def test_preset_sizes_on_pems_bay_shapes(self, d, layers, heads, published):
        count = count_parameters(_pems_bay_config(d, layers, heads), PEMS_BAY_MAXIMA)
        assert abs(count - published) / published < 0.1

    def test_count_matches_initialized_set(self, tiny_config, tiny_structure):
        params = init_parameters(tiny_config, tiny_structure.maxima, seed=0)
        assert params.count() == count_parameters(tiny_config, tiny_structure.maxima)
        assert list(params) == list(parameter_shapes(tiny_config, tiny_structure.maxima))

    def test_same_seed_is_bitwise_equal(self, tiny_config, tiny_structure):
        a = init_parameters(tiny_config, tiny_structure.maxima, seed=4)
        b = init_parameters(tiny_config, tiny_structure.maxima, seed=4)
        for name in a:
            np.testing.assert_array_equal(a[name].data, b[name].data)

    def test_different_seed_differs(self, tiny_config, tiny_structure):
        a = init_parameters(tiny_config, tiny_structure.maxima, seed=4)
        b = init_parameters(tiny_config, tiny_structure.maxima, seed=5)
        assert any(not np.array_equal(a[name].data, b[name].data) for name in a)

    def test_spatial_bias_statistics(self):
        maxima = GraphMaxima(max_in=10, max_out=10, max_spd=40)
        config = ModelConfig(d=128, layers=6, heads=4, input_steps=12, horizon=12, num_nodes=20, channels=3)
        table = init_parameters(config, maxima, seed=0)['bias.spatial'].data
        assert abs(table[:maxima.max_spd + 1].std() - 0.02) < 0.005
        np.testing.assert_array_equal(table[maxima.max_spd + 1:], 0.0)

    def test_undirected_graph_uses_one_table(self, tiny_config):
        shapes = parameter_shapes(tiny_config, GraphMaxima(max_in=2, max_out=3, max_spd=2, directed=False))
        assert shapes['embed.z'] == (4, tiny_config.d)
        assert 'embed.z_in' not in shapes

    def test_parameter_groups(self):
        assert decays_weight('enc.2.attn.wq')
        assert not decays_weight('enc.2.ln1.gamma')
        assert not decays_weight('embed.pos')
        assert layer_of('enc.3.ffn.w1') == 3
        assert layer_of('bias.spatial') == -1
        assert layer_of('head.w1') is None


class TestEmbedding:

    def test_zero_inputs_and_tables(self, tiny_structure):
        config = ModelConfig(d=8, heads=2, token_mode=TokenMode.NONE, input_steps=3, horizon=3, num_nodes=4, channels=3)
        params = init_parameters(config, tiny_structure.maxima, seed=0)
        _zero(params, 'embed.z_in', 'embed.z_out', 'embed.pos')
        structure = tiny_structure.relayout(config.layout())
        sequence = embed_inputs(np.zeros((1, 3, 4, 3)), params, config, structure.degrees, structure.layout)
        assert sequence.H.shape == (1, 12, 8)
        np.testing.assert_array_equal(sequence.H.data, 0.0)

    def test_centrality_is_time_invariant(self, tiny_config, tiny_structure):
        config = tiny_config.with_changes(use_positional=False)
        params = init_parameters(config, tiny_structure.maxima, seed=0)
        layout = tiny_structure.layout
        H = embed_inputs(np.zeros((1, 3, 4, 3)), params, config, tiny_structure.degrees, layout).H.data[0]
        z = centrality_encoding(params, tiny_structure.degrees).data
        for i in range(4):
            for t in range(3):
                np.testing.assert_array_equal(H[layout.flat_index(t, i)], z[i])

    def test_centrality_sums_in_and_out_tables(self, tiny_config, tiny_structure):
        params = init_parameters(tiny_config, tiny_structure.maxima, seed=0)
        degrees = tiny_structure.degrees
        z = centrality_encoding(params, degrees).data
        expected = params['embed.z_in'].data[degrees.in_deg] + params['embed.z_out'].data[degrees.out_deg]
        np.testing.assert_array_equal(z, expected)

    def test_cls_sequence_length(self):
        assert _pems_bay_config(128, 6, 4).layout().length == 3901

    def test_wrong_input_shape(self, tiny_config, tiny_structure):
        params = init_parameters(tiny_config, tiny_structure.maxima, seed=0)
        with pytest.raises(ShapeError):
            embed_inputs(np.zeros((1, 3, 5, 3)), params, tiny_config, tiny_structure.degrees, tiny_structure.layout)


class TestAttention:

    def test_zero_queries_and_keys_average_values(self):
        config = ModelConfig(d=2, layers=1, heads=1, token_mode=TokenMode.NONE, input_steps=1, horizon=1,
                             num_nodes=2, channels=1).with_changes(use_spatial_bias=False)
        structure = GraphStructure.build(WeightedAdjacency(np.zeros((2, 2))), config.layout())
        params = init_parameters(config, structure.maxima, seed=0)
        _zero(params, 'enc.0.attn.wq', 'enc.0.attn.wk')
        params['enc.0.attn.wo'].data[...] = np.eye(2)

        H = Tensor(np.random.default_rng(0).normal(size=(1, 2, 2)))
        trace = []
        out = biased_multihead_attention(H, structure.bias_index, params, 0, config, trace).data
        values = H.data[0] @ params['enc.0.attn.wv'].data
        np.testing.assert_allclose(trace[0], 0.5, atol=1e-15)
        np.testing.assert_allclose(out[0], np.tile(values.mean(axis=0), (2, 1)), atol=1e-12)

    def test_matches_pairwise_oracle(self):
        config = ModelConfig(d=2, layers=1, heads=1, token_mode=TokenMode.NONE, input_steps=1, horizon=1,
                             num_nodes=3, channels=1)
        structure = GraphStructure.build(_chain(3), config.layout())
        params = init_parameters(config, structure.maxima, seed=1)
        rng = np.random.default_rng(1)
        params['bias.spatial'].data[...] = rng.normal(size=params['bias.spatial'].shape)
        H = rng.normal(size=(1, 3, 2))

        wq, wk, wv, wo = (params[f'enc.0.attn.{k}'].data for k in ('wq', 'wk', 'wv', 'wo'))
        table, buckets = params['bias.spatial'].data, structure.bias_index.buckets
        q, k, v = H[0] @ wq, H[0] @ wk, H[0] @ wv
        expected = np.zeros((3, 2))
        for p in range(3):
            scores = [q[p].dot(k[r]) / math.sqrt(2.0) + table[buckets[p, r], 0] for r in range(3)]
            weights = np.exp(np.array(scores) - max(scores))
            weights /= weights.sum()
            expected[p] = sum(weights[r] * v[r] for r in range(3))
        expected = expected @ wo

        out = biased_multihead_attention(Tensor(H), structure.bias_index, params, 0, config).data
        np.testing.assert_allclose(out[0], expected, atol=1e-12)

    def test_zero_bias_equals_disabled_bias(self, tiny_config, tiny_structure):
        params = init_parameters(tiny_config, tiny_structure.maxima, seed=0)
        _zero(params, 'bias.spatial')
        H = Tensor(np.random.default_rng(2).normal(size=(2, tiny_structure.layout.length, tiny_config.d)))
        with_bias = biased_multihead_attention(H, tiny_structure.bias_index, params, 0, tiny_config).data
        without = biased_multihead_attention(H, tiny_structure.bias_index, params, 0,
                                             tiny_config.with_changes(use_spatial_bias=False)).data
        np.testing.assert_array_equal(with_bias, without)

    def test_rows_are_distributions(self, tiny_config, tiny_structure):
        params = init_parameters(tiny_config, tiny_structure.maxima, seed=0)
        H = Tensor(np.random.default_rng(3).normal(size=(2, tiny_structure.layout.length, tiny_config.d)))
        trace = []
        biased_multihead_attention(H, tiny_structure.bias_index, params, 1, tiny_config, trace)
        assert trace[0].shape == (2, tiny_config.heads, 13, 13)
        np.testing.assert_allclose(trace[0].sum(axis=-1), 1.0, atol=1e-12)


class TestEncoderBlock:

    def test_zero_weights_pass_residual_through(self, tiny_config, tiny_structure):
        params = init_parameters(tiny_config, tiny_structure.maxima, seed=0)
        _zero(params, *[name for name in params if name.startswith('enc.0.') and not name.endswith('.gamma')])
        H = Tensor(np.random.default_rng(0).normal(size=(2, 13, tiny_config.d)))
        out = encoder_block(H, tiny_structure.bias_index, params, 0, tiny_config)
        np.testing.assert_array_equal(out.data, H.data)

    @pytest.mark.parametrize('mode', list(TokenMode))
    def test_shape_is_preserved(self, mode, tiny_config, tiny_structure):
        config = tiny_config.with_changes(token_mode=mode)
        structure = tiny_structure.relayout(config.layout())
        params = init_parameters(config, structure.maxima, seed=0)
        H = Tensor(np.random.default_rng(1).normal(size=(3, structure.layout.length, config.d)))
        assert encoder_block(H, structure.bias_index, params, 1, config).shape == H.shape

    def test_dropout_depends_on_generator(self, tiny_config, tiny_structure):
        config = tiny_config.with_changes(dropout=0.3)
        params = init_parameters(config, tiny_structure.maxima, seed=0)
        H = Tensor(np.random.default_rng(1).normal(size=(1, 13, config.d)))

        def run(seed):
            return encoder_block(H, tiny_structure.bias_index, params, 0, config, training=True,
                                 rng=np.random.default_rng(seed)).data

        np.testing.assert_array_equal(run(7), run(7))
        assert not np.array_equal(run(7), run(8))
        inference = encoder_block(H, tiny_structure.bias_index, params, 0, config).data
        assert not np.array_equal(run(7), inference)


class TestForward:

    def test_horizon_output_shape(self):
        config = ModelConfig(d=8, layers=1, heads=2, input_steps=12, horizon=12, num_nodes=3, channels=289)
        structure = GraphStructure.build(_chain(3), config.layout())
        model = TGraphormer.create(config, structure, seed=0)
        X = np.random.default_rng(0).normal(size=(12, 3, 289))
        assert model(X).shape == (12, 3, 1)
        assert model(np.stack([X, X])).shape == (2, 12, 3, 1)

    def test_token_modes_share_output_shape(self, tiny_config, tiny_structure):
        X = np.random.default_rng(0).normal(size=(2, 3, 4, 3))
        shapes = set()
        for mode in (TokenMode.NONE, TokenMode.CLS):
            config = tiny_config.with_changes(token_mode=mode)
            model = TGraphormer.create(config, tiny_structure.relayout(config.layout()), seed=0)
            shapes.add(model(X).shape)
        assert shapes == {(2, 3, 4, 1)}

    @pytest.mark.parametrize('flag, tables', [('use_spatial_bias', ['bias.spatial']),
                                              ('use_centrality', ['embed.z_in', 'embed.z_out']),
                                              ('use_positional', ['embed.pos'])])
    def test_disabled_encoding_equals_zeroed_table(self, flag, tables, tiny_config, tiny_structure):
        X = np.random.default_rng(1).normal(size=(2, 3, 4, 3))
        disabled = TGraphormer.create(tiny_config.with_changes(**{flag: False}), tiny_structure, seed=0)
        zeroed = TGraphormer.create(tiny_config, tiny_structure, seed=0)
        _zero(zeroed.params, *tables)
        np.testing.assert_array_equal(disabled(X).data, zeroed(X).data)

    @settings(max_examples=10, deadline=None)
    @given(st.permutations(range(4)), st.sampled_from(list(TokenMode)))
    def test_relabelled_nodes_permute_outputs(self, order, mode):
        # 新编号 a 对应原节点 order[a]
        order = np.array(order)
        relabel = np.argsort(order)
        sources, targets, dists = np.array([0, 1, 2, 3]), np.array([1, 2, 3, 1]), [1.0, 2.0, 3.0, 1.5]
        config = ModelConfig(d=8, layers=2, heads=2, ffn_ratio=2, token_mode=mode, input_steps=3, horizon=3,
                             num_nodes=4, channels=3).with_changes(use_positional=False)

        def predict(src, dst, X):
            adjacency = build_adjacency(GraphSpec.from_distances(4, src, dst, dists, kappa=5.0))
            structure = GraphStructure.build(adjacency, config.layout())
            return TGraphormer.create(config, structure, seed=0)(X).data

        X = np.random.default_rng(4).normal(size=(2, 3, 4, 3))
        original = predict(sources, targets, X)
        relabelled = predict(relabel[sources], relabel[targets], X[:, :, order])
        np.testing.assert_allclose(relabelled, original[:, :, order], atol=1e-10)

    def test_output_is_denormalized(self, tiny_config, tiny_structure):
        X = np.random.default_rng(2).normal(size=(3, 4, 3))
        params = init_parameters(tiny_config, tiny_structure.maxima, seed=0)
        raw = forward(X, params, tiny_config, tiny_structure).data
        scaled = forward(X, params, tiny_config, tiny_structure, Normalizer(mean=60.0, std=8.0)).data
        np.testing.assert_allclose(scaled, raw * 8.0 + 60.0, atol=1e-12)

    def test_layout_mismatch(self, tiny_config, tiny_structure):
        params = init_parameters(tiny_config, tiny_structure.maxima, seed=0)
        structure = tiny_structure.relayout(tiny_config.with_changes(token_mode=TokenMode.NONE).layout())
        with pytest.raises(ShapeError):
            forward(np.zeros((3, 4, 3)), params, tiny_config, structure)

    def test_end_to_end_gradients(self, tiny_config, tiny_structure):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(2, 3, 4, 3))
        Y = rng.normal(0.0, 0.5, size=(2, 3, 4, 1))
        params = init_parameters(tiny_config, tiny_structure.maxima, seed=0)

        def f(p):
            return huber_loss(forward(X, p, tiny_config, tiny_structure), Y, delta=1.5)

        assert finite_difference_check(f, params) < 1e-4

    def test_attention_traces(self, tiny_config, tiny_structure):
        model = TGraphormer.create(tiny_config, tiny_structure, seed=0)
        pred, traces = model.attend(np.random.default_rng(3).normal(size=(2, 3, 4, 3)))
        assert pred.shape == (2, 3, 4, 1)
        assert len(traces) == 2
        assert len(traces[0].layers) == tiny_config.layers
        np.testing.assert_allclose(traces[1].layers[0].sum(axis=-1), 1.0, atol=1e-12)

    def test_predict_matches_batched_call(self, tiny_model, tiny_data):
        pred = tiny_model.predict(tiny_data.val, batch_size=7)
        X, _ = tiny_data.val.batch(range(len(tiny_data.val)))
        assert pred.shape == (len(tiny_data.val), 3, 4, 1)
        np.testing.assert_allclose(pred, tiny_model(X).data, atol=1e-10)

    def test_inference_is_deterministic(self, tiny_model, tiny_data):
        X, _ = tiny_data.test.batch([0, 1, 2])
        np.testing.assert_array_equal(tiny_model(X).data, tiny_model(X).data)

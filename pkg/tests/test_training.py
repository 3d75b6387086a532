import math
from collections import OrderedDict

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from stgraphormer.errors import ConfigError, NumericError, ShapeError
from stgraphormer.model import TGraphormer
from stgraphormer.numerics import Tape, Tensor, backward
from stgraphormer.registry import TrainPresets, lookup
from stgraphormer.training import (Checkpoint, OptimizerState, TrainConfig, Trainer, adamw_step, clip_global_norm,
                                   global_norm, huber_loss, layer_lr_scales, load_checkpoint, lr_at,
                                   save_checkpoint, step_fraction, train)


def _huber(error: float, delta: float = 1.5) -> float:
    return huber_loss(Tensor([[2.0 + error]]), np.array([[2.0]]), delta).item()


def _clone(model: TGraphormer) -> TGraphormer:
    params = type(model.params).from_arrays(model.params.snapshot())
    return TGraphormer(model.config, params, model.structure, model.normalizer)


class TestHuberLoss:

    def test_quadratic_branch(self):
        assert _huber(1.0) == 0.5

    def test_linear_branch(self):
        assert _huber(3.0) == pytest.approx(3.375, abs=1e-12)
        assert _huber(-3.0) == pytest.approx(3.375, abs=1e-12)

    def test_continuous_at_delta(self):
        assert _huber(1.5) == pytest.approx(1.125, abs=1e-12)
        assert _huber(1.5 + 1e-9) == pytest.approx(1.125, abs=1e-8)

    @given(st.floats(0.5, 3.0))
    def test_slope_is_continuous_at_delta(self, delta):
        h = 1e-7
        left = (_huber(delta, delta) - _huber(delta - h, delta)) / h
        right = (_huber(delta + h, delta) - _huber(delta, delta)) / h
        assert left == pytest.approx(right, abs=1e-6)
        assert right == pytest.approx(delta, abs=1e-6)

        grads = []
        for error in (delta - 1e-9, delta + 1e-9):
            pred = Tensor([[2.0 + error]], requires_grad=True)
            with Tape():
                backward(huber_loss(pred, np.array([[2.0]]), delta))
            grads.append(pred.grad.item())
        assert grads[0] == pytest.approx(grads[1], abs=1e-6)

    def test_missing_targets_are_masked(self):
        pred = Tensor([[1.0, 5.0, 9.0]])
        loss = huber_loss(pred, np.array([[2.0, 0.0, 9.0]]))
        # (0.5 + 0) / 2 observed entries
        assert loss.item() == pytest.approx(0.25)

    def test_shared_denominator(self):
        pred = Tensor([[3.0, 3.0]])
        loss = huber_loss(pred, np.array([[2.0, 4.0]]), denominator=4)
        assert loss.item() == pytest.approx(0.25)

    def test_empty_mask(self):
        with pytest.raises(NumericError):
            huber_loss(Tensor([[1.0]]), np.array([[0.0]]))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            huber_loss(Tensor(np.ones((2, 3))), np.ones((3, 2)))


class TestSchedule:

    config = TrainConfig(epochs=50, warmup_epochs=10, base_lr=1e-3)

    def test_starts_at_zero(self):
        assert lr_at(0.0, self.config) == 0.0

    def test_peak_at_end_of_warmup(self):
        assert lr_at(10 / 50, self.config) == pytest.approx(1e-3, rel=1e-12)

    def test_ends_at_zero(self):
        assert abs(lr_at(1.0, self.config)) <= 1e-12 * 1e-3

    def test_warmup_is_linear_and_decay_monotone(self):
        warm = [lr_at(f, self.config) for f in np.linspace(0.0, 0.2, 11)]
        np.testing.assert_allclose(np.diff(warm), 1e-4, rtol=1e-9)
        decay = [lr_at(f, self.config) for f in np.linspace(0.2, 1.0, 50)]
        assert all(a >= b for a, b in zip(decay, decay[1:]))

    def test_last_step_lands_on_one(self):
        assert step_fraction(99, 100) == 1.0

    def test_without_warmup(self):
        config = TrainConfig(epochs=5, warmup_epochs=0, base_lr=1e-3)
        assert lr_at(0.0, config) == pytest.approx(1e-3)


class TestLayerScales:

    names = ['embed.w0', 'bias.spatial', 'enc.0.attn.wq', 'enc.5.ffn.w1', 'final_norm.gamma', 'head.w2']

    def test_no_decay(self):
        assert set(layer_lr_scales(self.names, 6, 1.0).values()) == {1.0}

    def test_decayed_scales(self):
        scales = layer_lr_scales(self.names, 6, 0.9)
        assert scales['enc.5.ffn.w1'] == pytest.approx(0.9)
        assert scales['enc.0.attn.wq'] == pytest.approx(0.9 ** 6)
        assert scales['embed.w0'] == pytest.approx(0.4782969)
        assert scales['bias.spatial'] == scales['embed.w0']
        assert scales['head.w2'] == scales['final_norm.gamma'] == 1.0

    def test_invalid_decay(self):
        with pytest.raises(ConfigError):
            layer_lr_scales(self.names, 6, 0.0)


class TestClipping:

    def test_small_gradient_is_unchanged(self):
        grads, norm = clip_global_norm({'g': np.array([0.3, 0.4])}, 1.0)
        np.testing.assert_array_equal(grads['g'], [0.3, 0.4])
        assert norm == pytest.approx(0.5)

    def test_large_gradient_is_rescaled(self):
        grads, norm = clip_global_norm({'g': np.array([3.0, 4.0])}, 1.0)
        np.testing.assert_allclose(grads['g'], [0.6, 0.8], atol=1e-15)
        assert norm == 5.0

    @given(arrays(np.float64, 6, elements=st.floats(-100, 100)), st.floats(0.01, 50))
    def test_post_clip_norm(self, g, max_norm):
        grads, norm = clip_global_norm({'a': g[:2], 'b': g[2:]}, max_norm)
        assert global_norm(grads) == pytest.approx(min(norm, max_norm), abs=1e-12)

    def test_non_finite_gradient(self):
        with pytest.raises(NumericError):
            clip_global_norm({'g': np.array([1.0, np.nan])}, 1.0)

    def test_unbounded_clip(self):
        grads, _ = clip_global_norm({'g': np.array([3e8, 4e8])}, math.inf)
        np.testing.assert_array_equal(grads['g'], [3e8, 4e8])


class TestAdamW:

    def test_zero_gradients_without_decay(self):
        params = {'enc.0.attn.wq': Tensor(np.ones((2, 2)))}
        adamw_step(params, {'enc.0.attn.wq': np.zeros((2, 2))}, OptimizerState.zeros(params), lr=0.1)
        np.testing.assert_array_equal(params['enc.0.attn.wq'].data, 1.0)

    def test_first_step_moves_by_lr(self):
        params = {'head.b2': Tensor([0.5])}
        state = adamw_step(params, {'head.b2': np.array([1.0])}, OptimizerState.zeros(params), lr=0.01)
        assert params['head.b2'].data[0] == pytest.approx(0.5 - 0.01 / (1.0 + 1e-8), abs=1e-15)
        assert state.step == 1

    def test_decay_applies_to_linear_weights_only(self):
        params = {'enc.0.attn.wq': Tensor([2.0]), 'enc.0.ln1.gamma': Tensor([2.0])}
        grads = {name: np.zeros(1) for name in params}
        adamw_step(params, grads, OptimizerState.zeros(params), lr=0.1, weight_decay=0.5)
        assert params['enc.0.attn.wq'].data[0] == pytest.approx(2.0 * (1.0 - 0.05))
        assert params['enc.0.ln1.gamma'].data[0] == 2.0

    def test_matches_reference_recurrence(self):
        rng = np.random.default_rng(0)
        theta = rng.normal(size=4)
        params = {'enc.1.ffn.w2': Tensor(theta.copy())}
        state = OptimizerState.zeros(params)
        m, v = np.zeros(4), np.zeros(4)
        lr, wd, scale, (b1, b2), eps = 0.01, 0.1, 0.9, (0.9, 0.999), 1e-8
        for t in range(1, 6):
            g = rng.normal(size=4)
            adamw_step(params, {'enc.1.ffn.w2': g}, state, lr, {'enc.1.ffn.w2': scale}, wd)
            theta = theta * (1 - lr * scale * wd)
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            theta = theta - lr * scale * (m / (1 - b1 ** t)) / (np.sqrt(v / (1 - b2 ** t)) + eps)
        np.testing.assert_allclose(params['enc.1.ffn.w2'].data, theta, atol=1e-14)

    def test_quadratic_bowl_descends(self):
        point = {'head.w1': Tensor([1.0, 2.0])}
        curvature = np.array([1.0, 10.0])
        state = OptimizerState.zeros(point)
        losses = []
        for _ in range(50):
            x = point['head.w1'].data
            losses.append(float(np.sum(curvature * x * x)))
            adamw_step(point, {'head.w1': 2.0 * curvature * x}, state, lr=0.01)
        assert all(a > b for a, b in zip(losses, losses[1:]))

    def test_state_must_cover_parameters(self):
        params = {'head.b1': Tensor(np.zeros(2))}
        with pytest.raises(ShapeError):
            adamw_step(params, {'head.b1': np.zeros(2)}, OptimizerState.zeros({'head.b2': Tensor(np.zeros(2))}), lr=0.1)


class TestTrainConfig:

    def test_warmup_must_precede_end(self):
        with pytest.raises(ConfigError):
            TrainConfig(epochs=5, warmup_epochs=5)

    def test_unknown_selection(self):
        with pytest.raises(ConfigError):
            TrainConfig(select_by='horizon_3')

    def test_dict_form(self):
        config = TrainConfig(clip_norm=math.inf, grad_accum_steps=3)
        assert TrainConfig.from_dict(config.to_dict()) == config
        assert config.effective_batch == 384

    def test_unknown_keys(self):
        with pytest.raises(ConfigError):
            TrainConfig.from_dict({'epochs': 3, 'momentum': 0.9})

    def test_presets(self):
        config = lookup(TrainPresets, 'metr-la-mini').value.build()
        assert (config.epochs, config.warmup_epochs, config.base_lr, config.clip_norm) == (100, 30, 3e-3, 2.0)


class TestTrainer:

    def test_accumulation_matches_large_batch(self, tiny_model, tiny_data):
        micro = TrainConfig(epochs=2, warmup_epochs=1, batch_size=4, grad_accum_steps=2, dropout=0.0)
        full = micro.with_changes(batch_size=8, grad_accum_steps=1)
        a = Trainer(_clone(tiny_model), micro, tiny_data, show_progress=False)
        b = Trainer(_clone(tiny_model), full, tiny_data, show_progress=False)
        assert a.total_steps == b.total_steps

        order = np.random.default_rng(0).permutation(len(tiny_data.train))
        for s in range(3):
            indices = order[s * 8:(s + 1) * 8]
            loss_a, loss_b = a.train_step(indices), b.train_step(indices)
            assert loss_a == pytest.approx(loss_b, abs=1e-12)
        for name in a.model.params:
            np.testing.assert_allclose(a.model.params[name].data, b.model.params[name].data, rtol=0, atol=1e-10)

    def test_rerun_is_deterministic(self, tiny_model, tiny_data):
        config = TrainConfig(epochs=1, warmup_epochs=0, batch_size=16, dropout=0.1)
        first = Trainer(_clone(tiny_model), config, tiny_data, seed=3, show_progress=False)
        second = Trainer(_clone(tiny_model), config, tiny_data, seed=3, show_progress=False)
        indices = np.arange(16)
        assert first.train_step(indices) == second.train_step(indices)
        for name in first.model.params:
            np.testing.assert_array_equal(first.model.params[name].data, second.model.params[name].data)

    def test_dropout_follows_train_config(self, tiny_model, tiny_data):
        trainer = Trainer(tiny_model, TrainConfig(epochs=1, warmup_epochs=0, dropout=0.2), tiny_data,
                          show_progress=False)
        assert trainer.model.config.dropout == 0.2

    def test_step_without_observed_targets_keeps_parameters(self, tiny_model, tiny_data):
        config = TrainConfig(epochs=1, warmup_epochs=0, batch_size=8, dropout=0.0, weight_decay=0.05)
        trainer = Trainer(_clone(tiny_model), config, tiny_data, show_progress=False)
        trainer.train_step(np.arange(8))
        params = trainer.model.params.snapshot()
        moments = OrderedDict((name, m.copy()) for name, m in trainer.state.m.items())

        trainer.data.train.target[:] = 0.0
        assert trainer.train_step(np.arange(8, 16)) == 0.0
        assert trainer.state.step == 2
        for name, array in params.items():
            np.testing.assert_array_equal(trainer.model.params[name].data, array)
            np.testing.assert_array_equal(trainer.state.m[name], moments[name])

    def test_training_writes_artifacts(self, tiny_model, tiny_data, tiny_train_config, tmp_path):
        result = train(tiny_model, tiny_train_config, tiny_data, seed=0, out_dir=tmp_path, show_progress=False)
        for name in ('best.bin', 'best.json', 'last.bin', 'last.json', 'log.csv'):
            assert (tmp_path / name).exists()
        log = pd.read_csv(tmp_path / 'log.csv')
        assert list(log.columns) == ['epoch', 'train_loss', 'val_mae', 'val_rmse', 'val_mape', 'lr']
        assert list(log['epoch']) == [0, 1]
        assert result.best.epoch == int(log['val_mae'].idxmin())
        assert result.last.optimizer.step == 2 * math.ceil(len(tiny_data.train) / 32)
        assert log['lr'].iloc[-1] == pytest.approx(0.0, abs=1e-15)

    def test_resume_reproduces_uninterrupted_run(self, tiny_model, tiny_data, tiny_train_config, tmp_path):
        reference = _clone(tiny_model)
        train(reference, tiny_train_config, tiny_data, seed=1, out_dir=tmp_path / 'full', show_progress=False)

        interrupted = Trainer(_clone(tiny_model), tiny_train_config, tiny_data, seed=1, out_dir=tmp_path / 'part',
                              show_progress=False)
        step = interrupted.train_step
        stop_at = interrupted.steps_per_epoch

        def failing_step(indices):
            if interrupted.state.step == stop_at:
                raise NumericError('interrupted')
            return step(indices)

        interrupted.train_step = failing_step
        with pytest.raises(NumericError):
            interrupted.train()
        assert load_checkpoint(tmp_path / 'part' / 'last').epoch == 0

        resumed = _clone(tiny_model)
        train(resumed, tiny_train_config, tiny_data, seed=1, out_dir=tmp_path / 'part',
              resume=tmp_path / 'part' / 'last', show_progress=False)
        for name in reference.params:
            np.testing.assert_array_equal(resumed.params[name].data, reference.params[name].data)
        full_log = pd.read_csv(tmp_path / 'full' / 'log.csv')
        part_log = pd.read_csv(tmp_path / 'part' / 'log.csv')
        pd.testing.assert_frame_equal(full_log, part_log)

    def test_resume_needs_optimizer_state(self, tiny_model, tiny_data, tiny_train_config, tmp_path):
        train(_clone(tiny_model), tiny_train_config, tiny_data, out_dir=tmp_path, show_progress=False)
        trainer = Trainer(tiny_model, tiny_train_config, tiny_data, show_progress=False)
        with pytest.raises(ConfigError):
            trainer.resume(tmp_path / 'best')

    def test_non_finite_loss_aborts(self, tiny_model, tiny_data, tiny_train_config):
        tiny_model.params['head.b2'].data[...] = np.nan
        trainer = Trainer(tiny_model, tiny_train_config, tiny_data, show_progress=False)
        with pytest.raises(NumericError):
            trainer.train_step(np.arange(8))


class TestCheckpoint:

    def test_saved_checkpoint_restores_model(self, tiny_model, tiny_data, tiny_train_config, tmp_path):
        params = tiny_model.params
        state = OptimizerState(m=OrderedDict((k, np.full(t.shape, 0.25)) for k, t in params.items()),
                               v=OrderedDict((k, np.full(t.shape, 0.5)) for k, t in params.items()),
                               step=7)
        checkpoint = Checkpoint(params=params.snapshot(), model_config=tiny_model.config,
                                train_config=tiny_train_config, maxima=tiny_model.structure.maxima,
                                normalizer=tiny_data.normalizer, epoch=3, seed=11, optimizer=state,
                                best_score=1.25, best_epoch=2)
        save_checkpoint(tmp_path / 'ckpt', checkpoint)
        loaded = load_checkpoint(tmp_path / 'ckpt')

        assert (loaded.model_config, loaded.train_config, loaded.maxima) == \
            (tiny_model.config, tiny_train_config, tiny_model.structure.maxima)
        assert (loaded.epoch, loaded.seed, loaded.best_score, loaded.best_epoch) == (3, 11, 1.25, 2)
        assert loaded.optimizer.step == 7
        np.testing.assert_array_equal(loaded.optimizer.v['head.w1'], 0.5)
        X, _ = tiny_data.test.batch([0, 1])
        rebuilt = loaded.build_model(tiny_model.structure)
        np.testing.assert_array_equal(rebuilt(X).data, tiny_model(X).data)

    def test_best_checkpoint_has_no_optimizer(self, tiny_model, tiny_data, tiny_train_config, tmp_path):
        train(tiny_model, tiny_train_config, tiny_data, out_dir=tmp_path, show_progress=False)
        best = load_checkpoint(tmp_path / 'best')
        assert best.optimizer is None
        assert best.val_metrics is not None and best.val_metrics.is_finite()

    def test_missing_checkpoint(self, tmp_path):
        with pytest.raises(ConfigError):
            load_checkpoint(tmp_path / 'nothing')

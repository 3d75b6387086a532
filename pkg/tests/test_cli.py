import json

import pandas as pd
import pytest

from stgraphormer import cli
from stgraphormer.errors import NumericError
from stgraphormer.training import load_checkpoint


def _write_config(directory, **overrides):
    config = {
        'series': 'synth/series.csv',
        'distances': 'synth/distances.csv',
        'kappa': 6.0,
        'input_steps': 3,
        'horizon': 3,
        'model': {'preset': 'micro', 'd': 16, 'layers': 1, 'heads': 2},
        'train': {'preset': 'synth_micro', 'epochs': 2, 'warmup_epochs': 1, 'batch_size': 64},
        'out': 'run',
        'seed': 0,
        'synth': {'num_nodes': 5, 'num_steps': 600},
    }
    config.update(overrides)
    config = {k: v for k, v in config.items() if v is not None}
    path = directory / 'config.json'
    path.write_text(json.dumps(config))
    return path


@pytest.fixture
def prepared(tmp_path):
    """已生成合成数据并完成 prepare 的运行目录."""
    config = _write_config(tmp_path)
    assert cli.main(['synth', '--config', str(config)]) == cli.EXIT_OK
    assert cli.main(['prepare', '--config', str(config)]) == cli.EXIT_OK
    return config, tmp_path / 'run'


class TestPipeline:

    def test_prepare_artifacts(self, prepared):
        _, out = prepared
        for name in ('adjacency', 'spd', 'degrees'):
            assert (out / 'graph' / f'{name}.csv').exists()
        for split in cli.SPLITS:
            assert (out / 'data' / f'{split}.bin').exists()
        with open(out / 'data' / 'normalizer.json') as f:
            manifest = json.load(f)
        assert manifest['channels'] == 289
        assert manifest['num_nodes'] == 5
        assert manifest['samples']['train'] == 420 - 6 + 1

    def test_train_eval_attend(self, prepared):
        config, out = prepared
        assert cli.main(['train', '--config', str(config)]) == cli.EXIT_OK
        log = pd.read_csv(out / 'train' / 'log.csv')
        assert log['epoch'].tolist() == [0, 1]
        assert (out / 'train' / 'best.bin').exists() and (out / 'train' / 'last.bin').exists()

        assert cli.main(['eval', '--config', str(config)]) == cli.EXIT_OK
        with open(out / 'eval' / 'test_metrics.json') as f:
            assert list(json.load(f)) == ['3']
        assert (out / 'eval' / 'test_persistence.csv').exists()

        assert cli.main(['attend', '--config', str(config), '--split', 'val', '--num-samples', '4',
                         '--per-layer']) == cli.EXIT_OK
        attention = out / 'attention' / 'val'
        assert (attention / 'node_node.csv').exists()
        assert (attention / 'time_time' / 'layer_0.csv').exists()
        with open(attention / 'heatmaps.json') as f:
            assert len(json.load(f)['layers']) == 1

    def test_resume_finished_run(self, prepared):
        config, out = prepared
        assert cli.main(['train', '--config', str(config)]) == cli.EXIT_OK
        assert cli.main(['train', '--config', str(config), '--resume', str(out / 'train' / 'last')]) == cli.EXIT_OK
        assert len(pd.read_csv(out / 'train' / 'log.csv')) == 2
        assert cli.main(['train', '--config', str(config), '--resume', str(out / 'train' / 'best')]) == cli.EXIT_CONFIG

    def test_train_ablation_variant(self, prepared):
        config, out = prepared
        assert cli.main(['train', '--config', str(config), '--ablate', 'no-spatial']) == cli.EXIT_OK
        checkpoint = load_checkpoint(out / 'train' / 'best')
        assert not checkpoint.model_config.flags.use_spatial_bias
        assert cli.main(['train', '--config', str(config), '--ablate', 'no_spatial',
                         '--ablate', 'token_cls']) == cli.EXIT_CONFIG

    def test_ablate_command(self, prepared):
        config, out = prepared
        assert cli.main(['ablate', '--config', str(config), '--ablate', 'token_none']) == cli.EXIT_OK
        frame = pd.read_csv(out / 'ablation' / 'ablation.csv')
        assert frame['variant'].tolist() == ['base', 'token_none']

    def test_prepare_is_reproducible(self, prepared):
        config, out = prepared
        again = out.parent / 'again'
        assert cli.main(['prepare', '--config', str(config), '--out', str(again)]) == cli.EXIT_OK
        for path in sorted(p for p in out.rglob('*') if p.is_file()):
            assert (again / path.relative_to(out)).read_bytes() == path.read_bytes()

    def test_training_is_reproducible(self, prepared):
        config, out = prepared
        again = out.parent / 'again'
        assert cli.main(['prepare', '--config', str(config), '--out', str(again)]) == cli.EXIT_OK
        for directory in (out, again):
            assert cli.main(['train', '--config', str(config), '--out', str(directory)]) == cli.EXIT_OK
        for path in sorted(p for p in (out / 'train').iterdir()):
            assert (again / 'train' / path.name).read_bytes() == path.read_bytes()


class TestExitCodes:

    def test_missing_config_file(self, tmp_path):
        assert cli.main(['prepare', '--config', str(tmp_path / 'absent.json')]) == cli.EXIT_CONFIG

    def test_missing_kappa(self, tmp_path):
        config = _write_config(tmp_path, kappa=None)
        assert cli.main(['synth', '--config', str(config)]) == cli.EXIT_CONFIG

    def test_unknown_preset(self, tmp_path):
        config = _write_config(tmp_path, model='huge')
        assert cli.main(['synth', '--config', str(config)]) == cli.EXIT_CONFIG

    def test_missing_inputs(self, tmp_path):
        config = _write_config(tmp_path)
        assert cli.main(['prepare', '--config', str(config)]) == cli.EXIT_CONFIG

    def test_eval_before_train(self, prepared):
        config, _ = prepared
        assert cli.main(['eval', '--config', str(config)]) == cli.EXIT_CONFIG

    def test_numeric_abort(self, tmp_path, monkeypatch):
        def diverge(*args, **kwargs):
            raise NumericError('Training loss is nan at step 0.')

        monkeypatch.setattr(cli, 'cmd_train', diverge)
        config = _write_config(tmp_path)
        assert cli.main(['train', '--config', str(config)]) == cli.EXIT_NUMERIC

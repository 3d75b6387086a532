"""
T-Graphormer 命令行入口

子命令: synth | prepare | train | eval | attend | ablate, 均由一个 JSON 配置文件驱动.
退出码: 0 成功, 2 配置或形状错误, 3 数值中止.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from rich.console import Console
from rich.table import Table

from .config import RunConfig
from .context import RunContext
from .dataset import (PreparedData, generate_synthetic, load_split_archive, prepare_splits, read_series,
                      save_split_archive, split_bounds, write_series_csv)
from .errors import ConfigError, NumericError, ShapeError
from .evaluation import (AblationHarness, AblationOutcome, HeatmapBundle, MetricsReport, apply_ablation,
                         attention_heatmaps, evaluate, evaluate_persistence)
from .graph import (GraphSpec, WeightedAdjacency, build_adjacency, compute_degrees, compute_spd, read_distances_csv,
                    read_matrix_csv, write_distances_csv, write_matrix_csv)
from .model import GraphStructure, ModelConfig, TGraphormer
from .training import TrainResult, load_checkpoint, train
from .utils import get_logger


logger = get_logger('stgraphormer.cli')

SPLITS = ('train', 'val', 'test')
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


# ---- 产物读取 ----

def _load_prepared(ctx: RunContext) -> PreparedData:
    splits = {name: load_split_archive(ctx.out_dir / 'data' / name) for name in SPLITS}
    return PreparedData(train=splits['train'], val=splits['val'], test=splits['test'],
                        normalizer=splits['train'].normalizer)


def _load_adjacency(run: RunConfig, ctx: RunContext) -> WeightedAdjacency:
    path = ctx.out_dir / 'graph' / 'adjacency.csv'
    if not path.exists():
        raise ConfigError(f'Graph artifacts are missing under {ctx.out_dir}; run `prepare` first.')
    return WeightedAdjacency(read_matrix_csv(path), directed=run.directed)


def _check_shapes(config: ModelConfig, dataset) -> None:
    expected = (config.num_nodes, config.channels, config.input_steps, config.horizon)
    found = (dataset.num_nodes, dataset.channels, dataset.input_steps, dataset.horizon)
    if expected != found:
        raise ShapeError(f'Checkpoint expects (N, C, T\', T) = {expected}, archive {dataset.name!r} has {found}.')


def _default_checkpoint(ctx: RunContext, checkpoint: Optional[str]) -> Path:
    return Path(checkpoint).with_suffix('') if checkpoint else ctx.out_dir / 'train' / 'best'


# ---- 子命令 ----

def cmd_synth(run: RunConfig, ctx: RunContext) -> Path:
    """生成内置合成数据集, 写到配置中的 series 与 distances 路径 (缺省为 ``<out>/synth/``)."""
    network = generate_synthetic(seed=run.seed, **run.synth)
    series_path = run.series or ctx.out_dir / 'synth' / 'series.csv'
    distances_path = run.distances or ctx.out_dir / 'synth' / 'distances.csv'
    write_series_csv(series_path, network.series)
    write_distances_csv(distances_path, network.sources, network.targets, network.dists)
    logger.info(f'Synthetic network: {network.series.num_nodes} sensors, {network.series.length} steps, '
                f'{len(network.dists)} distance rows -> {series_path}, {distances_path}.')
    return series_path


def cmd_prepare(run: RunConfig, ctx: RunContext) -> Path:
    """构图, 计算度与最短路径, 划分数据并写出三个划分的归档.

    Raises:
        ConfigError: 如果输入文件缺失, κ 缺失或划分过短.
    """
    run.require_inputs()
    series = read_series(run.series)
    num_nodes, sources, targets, dists = read_distances_csv(run.distances, run.id_map, num_nodes=series.num_nodes)
    spec = GraphSpec.from_distances(num_nodes, sources, targets, dists, run.kappa, run.directed)
    adjacency = build_adjacency(spec)
    degrees = compute_degrees(adjacency)
    spd = compute_spd(adjacency)

    write_matrix_csv(ctx.path('graph', 'adjacency.csv'), adjacency.matrix)
    write_matrix_csv(ctx.path('graph', 'spd.csv'), spd.spd)
    pd.DataFrame({'in_deg': degrees.in_deg, 'out_deg': degrees.out_deg}).to_csv(ctx.path('graph', 'degrees.csv'),
                                                                              index=False)
    logger.info(f'Graph: N={num_nodes}, sigma={spec.sigma:.4f}, kappa={spec.kappa}, '
                f'max degree in/out={degrees.max_in}/{degrees.max_out}, max SPD={spd.max_spd}.')

    data = prepare_splits(series, run.split, run.input_steps, run.horizon)
    interval_minutes = series.sampling_interval / pd.Timedelta(minutes=1)
    first, second = split_bounds(series.length, run.split)
    for name, start in zip(SPLITS, (0, first, second)):
        save_split_archive(ctx.path('data', name), data.split(name), run.seed,
                           series.timestamps[start].isoformat(), interval_minutes)

    manifest = {
        'mean': data.normalizer.mean,
        'std': data.normalizer.std,
        'channels': data.train.channels,
        'slots_per_day': data.train.num_slots,
        'num_nodes': data.train.num_nodes,
        'input_steps': run.input_steps,
        'horizon': run.horizon,
        'interval_minutes': interval_minutes,
        'directed': run.directed,
        'samples': {name: len(data.split(name)) for name in SPLITS},
    }
    path = ctx.path('data', 'normalizer.json')
    with open(path, 'w') as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write('\n')
    logger.info(f'Prepared C={data.train.channels} channels at {interval_minutes:g}-min sampling; '
                f'windows train/val/test = {manifest["samples"]}.')
    return path


def cmd_train(run: RunConfig,
              ctx: RunContext,
              resume: Optional[str] = None,
              ablate: Optional[str] = None) -> TrainResult:
    """在已准备好的数据上训练, 写出最佳与最后的检查点以及训练日志."""
    data = _load_prepared(ctx)
    config = run.model_config(data.train.num_nodes, data.train.channels)
    if ablate is not None:
        config = apply_ablation(config, ablate)
        logger.info(f'Training ablation variant {ablate}.')
    structure = GraphStructure.build(_load_adjacency(run, ctx), config.layout())
    model = TGraphormer.create(config, structure, data.normalizer, run.seed)
    resume_stem = None if resume is None else Path(resume).with_suffix('')
    return train(model, run.train, data, seed=run.seed, out_dir=ctx.out_dir / 'train', resume=resume_stem)


def _print_report(title: str, reports: Sequence[tuple]) -> None:
    table = Table(title=title)
    for column in ('model', 'horizon', 'MAE', 'RMSE', 'MAPE (%)'):
        table.add_column(column, justify='right')
    for name, report in reports:
        for h, m in sorted(report.horizons.items()):
            table.add_row(name, str(h), f'{m.mae:.4f}', f'{m.rmse:.4f}', f'{m.mape:.2f}')
    Console(stderr=True).print(table)


def cmd_eval(run: RunConfig, ctx: RunContext, checkpoint: Optional[str] = None, split: str = 'test') -> MetricsReport:
    """在某个划分上评估检查点, 同时给出持续性基线.

    Raises:
        ShapeError: 如果检查点与归档的形状不一致.
    """
    checkpoint = load_checkpoint(_default_checkpoint(ctx, checkpoint))
    dataset = load_split_archive(ctx.out_dir / 'data' / split)
    _check_shapes(checkpoint.model_config, dataset)
    structure = GraphStructure.build(_load_adjacency(run, ctx), checkpoint.model_config.layout())
    model = checkpoint.build_model(structure)

    report = evaluate(model, dataset)
    baseline = evaluate_persistence(dataset)
    report.write(ctx.path('eval', f'{split}_metrics'))
    baseline.write(ctx.path('eval', f'{split}_persistence'))
    _print_report(f'{split} split, checkpoint epoch {checkpoint.epoch}', [('t-graphormer', report),
                                                                         ('persistence', baseline)])
    return report


def cmd_attend(run: RunConfig,
               ctx: RunContext,
               checkpoint: Optional[str] = None,
               split: str = 'test',
               num_samples: int = 16,
               per_layer: bool = False,
               batch_size: int = 8) -> HeatmapBundle:
    """对前 ``num_samples`` 个窗口记录注意力并聚合为热力图.

    Raises:
        ConfigError: 如果 num_samples 不为正.
    """
    if num_samples <= 0:
        raise ConfigError(f'num_samples must be positive, got {num_samples}.')
    checkpoint = load_checkpoint(_default_checkpoint(ctx, checkpoint))
    dataset = load_split_archive(ctx.out_dir / 'data' / split)
    _check_shapes(checkpoint.model_config, dataset)
    layout = checkpoint.model_config.layout()
    model = checkpoint.build_model(GraphStructure.build(_load_adjacency(run, ctx), layout))

    count = min(num_samples, len(dataset))
    if count < num_samples:
        logger.warning(f'Split {split!r} has only {count} windows; using all of them.')
    traces = []
    for start in range(0, count, batch_size):
        X, _ = dataset.batch(np.arange(start, min(start + batch_size, count)))
        traces.extend(model.attend(X)[1])

    bundle = attention_heatmaps(traces, layout, per_layer=per_layer)
    manifest = bundle.write(ctx.out_dir / 'attention' / split)
    logger.info(f'Heatmaps from {count} windows written to {manifest.parent}.')
    return bundle


def cmd_ablate(run: RunConfig, ctx: RunContext, variants: Optional[List[str]] = None) -> List[AblationOutcome]:
    """重训基础模型与各消融变体, 写出 ``ablation.json`` 与 ``ablation.csv``."""
    data = _load_prepared(ctx)
    config = run.model_config(data.train.num_nodes, data.train.channels)
    structure = GraphStructure.build(_load_adjacency(run, ctx), config.layout())
    harness = AblationHarness(config, run.train, data, structure, seed=run.seed, out_dir=ctx.out_dir / 'ablation')
    outcomes = harness.sweep(variants)
    for outcome in outcomes:
        logger.info(f'{outcome.variant}: relative MAE change '
                    + ', '.join(f'h{h} {v:+.2%}' for h, v in outcome.relative_mae.items()))
    return outcomes


# ---- 入口 ----

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='stgraphormer', description='Spatiotemporal graph transformer for traffic forecasting')
    parser.add_argument('command', choices=['synth', 'prepare', 'train', 'eval', 'attend', 'ablate'])
    parser.add_argument('--config', type=str, required=True, help='Path to the JSON run config')
    parser.add_argument('--seed', type=int, default=None, help='Override the config seed')
    parser.add_argument('--out', type=str, default=None, help='Override the output directory')
    parser.add_argument('--resume', type=str, default=None, help='Checkpoint to resume training from')
    parser.add_argument('--ablate', type=str, action='append', default=None,
                        help='Ablation variant (train: exactly one; ablate: repeatable, default all)')
    parser.add_argument('--checkpoint', type=str, default=None, help='Checkpoint for eval/attend (default <out>/train/best)')
    parser.add_argument('--split', type=str, choices=SPLITS, default='test', help='Split for eval/attend')
    parser.add_argument('--num-samples', type=int, default=16, help='Windows aggregated by attend')
    parser.add_argument('--per-layer', action='store_true', help='Also emit per-layer heatmaps')
    parser.add_argument('--debug', action='store_true', help='Enable debug logging')
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = RunConfig.from_json(args.config).with_overrides(seed=args.seed, out=args.out)
        with RunContext(run.out, seed=run.seed, log_level=logging.DEBUG if args.debug else logging.INFO) as ctx:
            if args.command == 'synth':
                cmd_synth(run, ctx)
            elif args.command == 'prepare':
                cmd_prepare(run, ctx)
            elif args.command == 'train':
                if args.ablate is not None and len(args.ablate) != 1:
                    raise ConfigError('`train --ablate` takes exactly one variant.')
                cmd_train(run, ctx, resume=args.resume, ablate=None if args.ablate is None else args.ablate[0])
            elif args.command == 'eval':
                cmd_eval(run, ctx, checkpoint=args.checkpoint, split=args.split)
            elif args.command == 'attend':
                cmd_attend(run, ctx, checkpoint=args.checkpoint, split=args.split,
                           num_samples=args.num_samples, per_layer=args.per_layer)
            else:
                cmd_ablate(run, ctx, variants=args.ablate)
    except (ConfigError, ShapeError) as e:
        logger.critical(f'{type(e).__name__}: {e}')
        return EXIT_CONFIG
    except NumericError as e:
        logger.critical(f'Numeric abort: {e}')
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())

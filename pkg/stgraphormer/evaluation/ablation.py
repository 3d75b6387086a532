import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Union

import pandas as pd

from ..dataset import PreparedData
from ..model import GraphStructure, ModelConfig, TGraphormer
from ..registry.ablations import Ablations
from ..registry.lookup import lookup
from ..utils import get_logger
from .metrics import MetricsReport, evaluate

if TYPE_CHECKING:
    from ..training import TrainConfig


logger = get_logger('stgraphormer.evaluation.ablation')

PathLike = Union[str, Path]
Variant = Union[str, Ablations]


def apply_ablation(config: ModelConfig, variant: Variant) -> ModelConfig:
    """对基础配置施加单项消融修改.

    Raises:
        ConfigError: 如果变体不存在.
    """
    return config.with_changes(**lookup(Ablations, variant).value.changes)


def relative_change(report: MetricsReport, base: MetricsReport) -> Dict[int, float]:
    """各步长上 MAE 相对基础模型的变化率, (变体 − 基础) / 基础; 基础 MAE 为 0 的步长记为 NaN."""
    changes = {}
    for h in sorted(report.horizons):
        base_mae = base.at(h).mae
        if base_mae == 0:
            logger.warning(f'Base MAE at horizon {h} is zero; relative change is undefined.')
            changes[h] = math.nan
        else:
            changes[h] = (report.at(h).mae - base_mae) / base_mae
    return changes


@dataclass
class AblationOutcome:
    variant: str
    model_config: ModelConfig
    report: MetricsReport
    relative_mae: Dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {'variant': self.variant,
                'test': self.report.to_dict(),
                'relative_mae': {str(h): v for h, v in self.relative_mae.items()}}


class AblationHarness:
    """从零重训基础模型与各消融变体, 使用相同的种子, 比较测试集指标.

    Example:
        harness = AblationHarness(base_config, train_config, data, structure, seed=0)
        outcomes = harness.sweep()
    """

    def __init__(self,
                 base_config: ModelConfig,
                 train_config: 'TrainConfig',
                 data: PreparedData,
                 structure: GraphStructure,
                 seed: int = 0,
                 out_dir: Optional[PathLike] = None,
                 show_progress: bool = False) -> None:
        self.base_config = base_config
        self.train_config = train_config
        self.data = data
        self.structure = structure
        self.seed = seed
        self.out_dir = None if out_dir is None else Path(out_dir)
        self.show_progress = show_progress
        self._base_report: Optional[MetricsReport] = None

    def train_and_test(self, config: ModelConfig, name: str) -> MetricsReport:
        """以给定配置从零训练, 返回最佳验证检查点在测试集上的指标."""
        # training 依赖 evaluation.metrics, 在此处导入
        from ..training import train

        structure = self.structure.relayout(config.layout())
        model = TGraphormer.create(config, structure, self.data.normalizer, self.seed)
        run_dir = None if self.out_dir is None else self.out_dir / name
        result = train(model, self.train_config, self.data, seed=self.seed, out_dir=run_dir,
                       show_progress=self.show_progress)
        report = evaluate(result.best.build_model(structure), self.data.test)
        logger.info(f'{name}: test MAE {report.longest.mae:.4f} at horizon {max(report.horizons)}.')
        return report

    def base_report(self) -> MetricsReport:
        if self._base_report is None:
            self._base_report = self.train_and_test(self.base_config, 'base')
        return self._base_report

    def run(self, variant: Variant) -> AblationOutcome:
        """训练单个变体并与基础模型比较.

        Raises:
            ConfigError: 如果变体不存在.
        """
        member = lookup(Ablations, variant)
        config = apply_ablation(self.base_config, member)
        logger.info(f'Ablation {member.id}: {member.value.description}.')
        report = self.train_and_test(config, member.id)
        return AblationOutcome(variant=member.id,
                               model_config=config,
                               report=report,
                               relative_mae=relative_change(report, self.base_report()))

    def sweep(self, variants: Optional[Sequence[Variant]] = None) -> List[AblationOutcome]:
        """依次运行各变体 (默认全部六个), 给出输出目录时写出 ``ablation.json`` 与 ``ablation.csv``."""
        members = list(Ablations) if variants is None else [lookup(Ablations, v) for v in variants]
        outcomes = [self.run(member) for member in members]
        if self.out_dir is not None:
            self.write(outcomes)
        return outcomes

    def write(self, outcomes: Sequence[AblationOutcome]) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        payload = {'base': self.base_report().to_dict(), 'variants': [o.to_dict() for o in outcomes]}
        with open(self.out_dir / 'ablation.json', 'w') as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write('\n')

        rows = []
        for name, report, relative in [('base', self.base_report(), {})] + \
                [(o.variant, o.report, o.relative_mae) for o in outcomes]:
            for h, m in sorted(report.horizons.items()):
                rows.append({'variant': name, 'horizon': h, 'mae': m.mae, 'rmse': m.rmse, 'mape': m.mape,
                             'relative_mae': relative.get(h, 0.0)})
        pd.DataFrame(rows).to_csv(self.out_dir / 'ablation.csv', index=False)
        return self.out_dir / 'ablation.json'


def run_ablation(base_config: ModelConfig,
                 variant: Variant,
                 train_config: 'TrainConfig',
                 data: PreparedData,
                 structure: GraphStructure,
                 seed: int = 0) -> AblationOutcome:
    """从零训练一个消融变体, 返回其测试指标与相对基础模型的 MAE 变化."""
    return AblationHarness(base_config, train_config, data, structure, seed).run(variant)

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

from .dataset import SplitSpec
from .errors import ConfigError
from .model import EncodingFlags, ModelConfig
from .registry import ModelPresets, SplitPresets, TrainPresets, lookup
from .training import TrainConfig


PathLike = Union[str, Path]

_MODEL_KEYS = {'d', 'layers', 'heads', 'ffn_ratio', 'dropout', 'token_mode'}
_FLAG_KEYS = set(EncodingFlags.__dataclass_fields__)
_SYNTH_KEYS = {'num_nodes', 'num_steps', 'radius', 'missing_rate', 'interval_minutes', 'start'}
_TOP_KEYS = {'series', 'distances', 'id_map', 'directed', 'kappa', 'split', 'input_steps', 'horizon',
             'model', 'train', 'out', 'seed', 'synth'}


def _model_fields(entry: Union[str, Dict[str, Any]]) -> Dict[str, Any]:
    """模型段: 预设名称, 或显式字段 (可以带 ``preset`` 作为起点)."""
    if isinstance(entry, str):
        return dict(lookup(ModelPresets, entry).value.attributes)
    entry = dict(entry)
    fields = dict(lookup(ModelPresets, entry.pop('preset')).value.attributes) if 'preset' in entry else {}
    unknown = set(entry) - _MODEL_KEYS - _FLAG_KEYS
    if unknown:
        raise ConfigError(f'Unknown model config keys: {sorted(unknown)}.')
    fields.update(entry)
    return fields


def _train_config(entry: Union[str, Dict[str, Any]]) -> TrainConfig:
    if isinstance(entry, str):
        return lookup(TrainPresets, entry).value.build()
    entry = dict(entry)
    if 'preset' in entry:
        return lookup(TrainPresets, entry.pop('preset')).value.build(**entry)
    return TrainConfig.from_dict(entry)


def _split_spec(entry: Union[str, Dict[str, Any]]) -> SplitSpec:
    if isinstance(entry, str):
        return lookup(SplitPresets, entry).value.build()
    entry = dict(entry)
    unknown = set(entry) - {'train', 'val', 'test'}
    if unknown:
        raise ConfigError(f'Unknown split keys: {sorted(unknown)}.')
    return SplitSpec(train_frac=entry.get('train', 0.7), val_frac=entry.get('val', 0.1), test_frac=entry.get('test', 0.2))


@dataclass
class RunConfig:
    """一次运行的声明式配置, 由 JSON 文件读取.

    相对路径以配置文件所在目录为基准解析; ``seed`` 与 ``out`` 可由命令行覆盖.
    """
    kappa: float
    series: Optional[Path] = None
    distances: Optional[Path] = None
    id_map: Optional[Path] = None
    directed: bool = True
    split: SplitSpec = field(default_factory=SplitSpec)
    input_steps: int = 12
    horizon: int = 12
    model: Dict[str, Any] = field(default_factory=lambda: dict(ModelPresets.MICRO.value.attributes))
    train: TrainConfig = field(default_factory=TrainConfig)
    out: Path = Path('runs/default')
    seed: int = 0
    synth: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kappa is None:
            raise ConfigError('Config key "kappa" is required and has no default.')
        if not self.kappa >= 0:
            raise ConfigError(f'Graph threshold kappa must be nonnegative, got {self.kappa}.')
        if self.input_steps <= 0 or self.horizon <= 0:
            raise ConfigError(f'Window sizes must be positive, got T\'={self.input_steps}, T={self.horizon}.')
        if self.horizon != self.input_steps:
            raise ConfigError(f'Horizon T={self.horizon} must equal the context length T\'={self.input_steps}: '
                              f'each context token predicts one horizon step.')
        if self.seed < 0:
            raise ConfigError(f'Seed must be a nonnegative integer, got {self.seed}.')
        unknown = set(self.synth) - _SYNTH_KEYS
        if unknown:
            raise ConfigError(f'Unknown synth keys: {sorted(unknown)}.')
        # 尽早暴露结构性错误 (例如 d 不能被 heads 整除)
        self.model_config(num_nodes=1, channels=1)

    def model_config(self, num_nodes: int, channels: int) -> ModelConfig:
        """补全形状字段后的模型配置, dropout 取训练配置中的值."""
        fields = {k: v for k, v in self.model.items() if k in _MODEL_KEYS}
        flags = EncodingFlags(**{k: v for k, v in self.model.items() if k in _FLAG_KEYS})
        fields['dropout'] = self.train.dropout
        return ModelConfig(flags=flags, input_steps=self.input_steps, horizon=self.horizon,
                           num_nodes=num_nodes, channels=channels, **fields)

    def require_inputs(self) -> None:
        """确认数据文件存在.

        Raises:
            ConfigError: 如果缺少 series 或 distances, 或文件不存在.
        """
        for name in ('series', 'distances'):
            path = getattr(self, name)
            if path is None:
                raise ConfigError(f'Config key "{name}" is required for this command.')
            if not path.exists() and not path.with_suffix('.json').exists():
                raise ConfigError(f'Referenced {name} file {path} does not exist.')
        if self.id_map is not None and not self.id_map.exists():
            raise ConfigError(f'Referenced id map {self.id_map} does not exist.')

    def with_overrides(self, seed: Optional[int] = None, out: Optional[PathLike] = None) -> 'RunConfig':
        if seed is not None:
            self.seed = int(seed)
        if out is not None:
            self.out = Path(out)
        return self

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: PathLike = '.') -> 'RunConfig':
        """由已解析的字典构造.

        Raises:
            ConfigError: 如果出现未知键, 未知预设, 或任一字段不合法.
        """
        unknown = set(data) - _TOP_KEYS
        if unknown:
            raise ConfigError(f'Unknown config keys: {sorted(unknown)}.')
        base_dir = Path(base_dir)

        def resolve(key: str) -> Optional[Path]:
            value = data.get(key)
            if value is None:
                return None
            path = Path(value)
            return path if path.is_absolute() else base_dir / path

        try:
            return cls(kappa=data.get('kappa'),
                       series=resolve('series'),
                       distances=resolve('distances'),
                       id_map=resolve('id_map'),
                       directed=bool(data.get('directed', True)),
                       split=_split_spec(data.get('split', 'dcrnn')),
                       input_steps=int(data.get('input_steps', 12)),
                       horizon=int(data.get('horizon', 12)),
                       model=_model_fields(data.get('model', 'micro')),
                       train=_train_config(data.get('train', 'synth_micro')),
                       out=resolve('out') or base_dir / 'runs' / 'default',
                       seed=int(data.get('seed', 0)),
                       synth=dict(data.get('synth', {})))
        except (TypeError, ValueError) as e:
            raise ConfigError(f'Invalid config value: {e}') from e

    @classmethod
    def from_json(cls, path: PathLike) -> 'RunConfig':
        """读取 JSON 配置文件.

        Raises:
            ConfigError: 如果文件不存在或不是合法 JSON.
        """
        path = Path(path)
        if not path.exists():
            raise ConfigError(f'Config file {path} does not exist.')
        try:
            with open(path) as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f'Config file {path} is not valid JSON: {e}') from e
        return cls.from_dict(data, base_dir=path.parent)

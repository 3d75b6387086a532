from enum import Enum

from ..model.config import ModelConfig
from .preset_template import PresetTemplate as Template


class ModelPresets(Enum):
    """三种模型规模 (d, k, heads); 形状字段 (T′, T, N, C) 在构造时补全."""
    MICRO = Template(ModelConfig, d=64, layers=6, heads=2, ffn_ratio=4, dropout=0.1)
    MINI = Template(ModelConfig, d=128, layers=6, heads=4, ffn_ratio=4, dropout=0.1)
    SMALL = Template(ModelConfig, d=192, layers=8, heads=6, ffn_ratio=4, dropout=0.1)

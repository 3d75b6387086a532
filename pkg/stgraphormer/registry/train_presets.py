from enum import Enum

from ..training.config import TrainConfig
from .preset_template import PresetTemplate as Template


# 所有预设共用的取值
_COMMON = dict(batch_size=128, dropout=0.1, layer_decay=0.9, huber_delta=1.5, betas=(0.9, 0.999))


class TrainPresets(Enum):
    """各数据集与模型规模下的训练超参数."""
    PEMS_BAY_MICRO = Template(TrainConfig, epochs=50, warmup_epochs=10, base_lr=2e-3, clip_norm=1.0, weight_decay=1e-4, **_COMMON)
    PEMS_BAY_MINI = Template(TrainConfig, epochs=50, warmup_epochs=10, base_lr=1e-3, clip_norm=1.0, weight_decay=1e-4, **_COMMON)
    PEMS_BAY_SMALL = Template(TrainConfig, epochs=50, warmup_epochs=10, base_lr=1e-3, clip_norm=1.0, weight_decay=1e-4, **_COMMON)
    METR_LA_MICRO = Template(TrainConfig, epochs=100, warmup_epochs=30, base_lr=2e-3, clip_norm=2.0, weight_decay=1e-4, **_COMMON)
    METR_LA_MINI = Template(TrainConfig, epochs=100, warmup_epochs=30, base_lr=3e-3, clip_norm=2.0, weight_decay=1e-4, **_COMMON)
    METR_LA_SMALL = Template(TrainConfig, epochs=100, warmup_epochs=30, base_lr=2e-3, clip_norm=2.0, weight_decay=1e-4, **_COMMON)
    PEMS03_MINI = Template(TrainConfig, epochs=100, warmup_epochs=10, base_lr=3.5e-3, clip_norm=1.0, weight_decay=1e-5, **_COMMON)
    PEMS04_MINI = Template(TrainConfig, epochs=100, warmup_epochs=10, base_lr=7.5e-3, clip_norm=1.0, weight_decay=1e-4, **_COMMON)
    PEMS08_MINI = Template(TrainConfig, epochs=100, warmup_epochs=10, base_lr=4.5e-3, clip_norm=1.0, weight_decay=1e-6, **_COMMON)
    # 内置合成数据集上的桌面规模训练, 约 2000 次更新
    SYNTH_MICRO = Template(TrainConfig, epochs=19, warmup_epochs=2, base_lr=2e-3, clip_norm=1.0, weight_decay=1e-4,
                           batch_size=32, dropout=0.1, layer_decay=0.9, huber_delta=1.5, betas=(0.9, 0.999))

from .context import RunContext
from .config import RunConfig
from .model import ModelConfig, TGraphormer
from .training import TrainConfig, Trainer


__all__ = [
    'RunContext',
    'RunConfig',
    'ModelConfig',
    'TGraphormer',
    'TrainConfig',
    'Trainer',
]

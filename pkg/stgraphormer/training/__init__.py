from .config import TrainConfig
from .loss import huber_loss, missing_mask
from .schedule import lr_at, step_fraction, layer_lr_scale, layer_lr_scales
from .optimizer import OptimizerState, global_norm, clip_global_norm, adamw_step
from .checkpoint import Checkpoint, save_checkpoint, load_checkpoint
from .trainer import TrainResult, Trainer, train


__all__ = [
    'TrainConfig',
    'huber_loss',
    'missing_mask',
    'lr_at',
    'step_fraction',
    'layer_lr_scale',
    'layer_lr_scales',
    'OptimizerState',
    'global_norm',
    'clip_global_norm',
    'adamw_step',
    'Checkpoint',
    'save_checkpoint',
    'load_checkpoint',
    'TrainResult',
    'Trainer',
    'train',
]

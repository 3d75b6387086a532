from .preset_template import PresetTemplate, AblationTemplate
from .ablations import Ablations
from .model_presets import ModelPresets
from .split_presets import SplitPresets
from .train_presets import TrainPresets
from .lookup import lookup


__all__ = [
    'PresetTemplate',
    'AblationTemplate',
    'Ablations',
    'ModelPresets',
    'SplitPresets',
    'TrainPresets',
    'lookup',
]

from enum import Enum

from ..dataset.split import SplitSpec
from .preset_template import PresetTemplate as Template


class SplitPresets(Enum):
    DCRNN = Template(SplitSpec, train_frac=0.7, val_frac=0.1, test_frac=0.2)
    PEMS = Template(SplitSpec, train_frac=0.6, val_frac=0.2, test_frac=0.2)

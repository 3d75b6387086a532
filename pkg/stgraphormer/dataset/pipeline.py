from dataclasses import dataclass

from ..utils import get_logger
from .impute import impute_historical_average
from .normalizer import Normalizer, fit_normalizer
from .series import RawSeries
from .split import SplitSpec, chronological_split
from .windows import WindowDataset, make_windows


logger = get_logger('stgraphormer.dataset.pipeline')


@dataclass
class PreparedData:
    train: WindowDataset
    val: WindowDataset
    test: WindowDataset
    normalizer: Normalizer

    def split(self, name: str) -> WindowDataset:
        return {'train': self.train, 'val': self.val, 'test': self.test}[name]


def prepare_splits(series: RawSeries, spec: SplitSpec, input_steps: int = 12, horizon: int = 12) -> PreparedData:
    """划分, 插补训练集, 拟合归一化并生成三个划分的窗口数据集.

    只有训练集做插补; 验证与测试集中的 0 值保留, 由指标掩码排除.
    """
    train, val, test = chronological_split(series, spec, input_steps, horizon)
    train = impute_historical_average(train)
    normalizer = fit_normalizer(train)
    logger.info(f'Split lengths train/val/test = {train.length}/{val.length}/{test.length}; '
                f'normalizer mean={normalizer.mean:.4f}, std={normalizer.std:.4f}.')

    return PreparedData(train=make_windows(train, input_steps, horizon, normalizer, name='train'),
                        val=make_windows(val, input_steps, horizon, normalizer, name='val'),
                        test=make_windows(test, input_steps, horizon, normalizer, name='test'),
                        normalizer=normalizer)

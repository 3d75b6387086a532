from .series import RawSeries, read_series, read_series_csv, write_series_csv, read_series_binary, write_series_binary
from .split import SplitSpec, chronological_split, split_bounds
from .normalizer import Normalizer, fit_normalizer, apply_normalizer, invert_normalizer
from .impute import impute_historical_average
from .time_features import slots_per_day, time_of_day_slots, time_of_day_features
from .windows import WindowedSample, WindowDataset, make_windows, shuffle_order
from .archive import save_split_archive, load_split_archive
from .pipeline import PreparedData, prepare_splits
from .synthetic import SyntheticNetwork, generate_synthetic


__all__ = [
    'RawSeries',
    'read_series',
    'read_series_csv',
    'write_series_csv',
    'read_series_binary',
    'write_series_binary',
    'SplitSpec',
    'chronological_split',
    'split_bounds',
    'Normalizer',
    'fit_normalizer',
    'apply_normalizer',
    'invert_normalizer',
    'impute_historical_average',
    'slots_per_day',
    'time_of_day_slots',
    'time_of_day_features',
    'WindowedSample',
    'WindowDataset',
    'make_windows',
    'shuffle_order',
    'save_split_archive',
    'load_split_archive',
    'PreparedData',
    'prepare_splits',
    'SyntheticNetwork',
    'generate_synthetic',
]

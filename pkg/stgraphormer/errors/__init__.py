from .config_error import ConfigError
from .shape_error import ShapeError
from .numeric_error import NumericError


__all__ = [
    'ConfigError',
    'ShapeError',
    'NumericError',
]

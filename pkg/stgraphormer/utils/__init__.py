from .logging.progress_logger import ProgressLogger
from .logging.project_formatter import ProjectFormatter
from .logging.get_logger import get_logger
from .container import save_container, load_container
from .threads import thread_limit


__all__ = [
    'ProgressLogger',
    'ProjectFormatter',
    'get_logger',
    'save_container',
    'load_container',
    'thread_limit',
]

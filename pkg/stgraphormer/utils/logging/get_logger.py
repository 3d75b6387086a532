import logging
from rich.logging import RichHandler

from .project_formatter import ProjectFormatter


def get_logger(name: str, level: int = logging.NOTSET) -> logging.Logger:
    """获取带 Rich 输出的项目日志记录器.

    同名 logger 重复获取时会替换旧的 handler, 避免日志重复打印.

    Args:
        name (str): 日志记录器名称, 约定以 ``stgraphormer.`` 开头.
        level (int, optional): 日志级别. 默认为 logging.NOTSET, 即沿用根记录器的级别.

    Returns:
        logging.Logger: 配置好的日志记录器.
    """
    logger = logging.getLogger(name)
    handler = RichHandler(rich_tracebacks=True, markup=False)
    handler.setFormatter(ProjectFormatter('[%(shortname)s] %(message)s'))
    logger.handlers.clear()
    logger.addHandler(handler)
    if level != logging.NOTSET:
        logger.setLevel(level)
    return logger

import logging


class ProjectFormatter(logging.Formatter):
    """为日志记录增加 ``shortname`` 字段的格式化器."""

    def format(self, record: logging.LogRecord) -> str:
        # 保留 name 字段最后一个 '.' 之后的内容, 例如 stgraphormer.training.trainer -> trainer
        record.shortname = record.name.rsplit('.', 1)[-1]
        return super().format(record)

class ConfigError(Exception):
    """由非法配置或输入数据引发的错误."""
    pass

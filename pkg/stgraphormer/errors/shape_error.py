class ShapeError(Exception):
    """由张量或数组形状不匹配引发的错误."""
    pass

class NumericError(Exception):
    """由数值异常 (NaN, 非有限梯度等) 引发的中止."""
    pass

import os


ENV_THREADS = 'ST_GRAPHORMER_THREADS'


def thread_limit() -> int:
    """读取环境变量 ``ST_GRAPHORMER_THREADS`` 给出的线程上限, 未设置或非法时为 1."""
    raw = os.environ.get(ENV_THREADS, '')
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)

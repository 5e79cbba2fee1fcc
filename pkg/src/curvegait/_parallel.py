import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "CURVEGAIT_THREADS"


def max_workers():
    """Worker cap from ``CURVEGAIT_THREADS``; defaults to the CPU count."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def ordered_map(func, items):
    """``list(map(func, items))``, evaluated on a thread pool when allowed."""
    items = list(items)
    workers = min(max_workers(), len(items))
    if workers <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))

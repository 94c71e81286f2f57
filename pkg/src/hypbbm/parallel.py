"""Replicate-level thread parallelism with a deterministic merge order."""

from concurrent.futures import ThreadPoolExecutor


def map_indexed(fn, n, threads=1):
    """Apply fn to each index in 0..n-1; results come back in index order.

    Each replicate must derive its own random stream from its index, so
    the output is independent of the thread count.
    """
    if threads is None or threads <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))

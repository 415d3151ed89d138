"""Ordered parallel map"""

from concurrent.futures import ThreadPoolExecutor


def map_ordered(func, items, threads=1):
    """Apply func to every item, return results in input order

    Runs in a thread pool when threads > 1. Exceptions raised by func
    propagate from the first failing item in input order.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, items))

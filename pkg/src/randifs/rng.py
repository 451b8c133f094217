"""Deterministic seed splitting and chunked parallel execution.

All randomness descends from a single 64-bit seed. A named stream is
``SeedSequence(seed, spawn_key=(STREAMS[name],))`` and chunk ``i`` of that
stream is ``SeedSequence(seed, spawn_key=(STREAMS[name], i))``. Work is cut
into chunks of a fixed size, so results do not depend on the worker count.
"""
from concurrent.futures import ThreadPoolExecutor

import numpy as np

STREAMS = {
    "sample": 1,
    "lyapunov": 2,
    "basepoints": 3,
    "parameter": 4,
    "oracle": 5,
    "parabolic": 6,
}

DEFAULT_CHUNK = 1 << 16


def chunk_generator(seed, stream, index):
    key = (STREAMS[stream], int(index))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))


def stream_generator(seed, stream):
    return np.random.default_rng(
        np.random.SeedSequence(int(seed), spawn_key=(STREAMS[stream],)))


def chunk_sizes(total, chunk=DEFAULT_CHUNK):
    total = int(total)
    sizes = [chunk] * (total // chunk)
    if total % chunk:
        sizes.append(total % chunk)
    return sizes


def map_chunks(func, total, seed, stream, threads=1, chunk=DEFAULT_CHUNK):
    """Run ``func(rng, size)`` over fixed-size chunks and return results in order."""
    sizes = chunk_sizes(total, chunk)
    tasks = [(chunk_generator(seed, stream, i), n) for i, n in enumerate(sizes)]
    if threads is None or threads <= 1 or len(tasks) <= 1:
        return [func(g, n) for g, n in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda t: func(*t), tasks))

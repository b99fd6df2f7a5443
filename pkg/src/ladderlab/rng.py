"""Seeded stream tree and order-preserving block parallelism.

Every Monte Carlo routine splits its replicas into fixed-size blocks, each
block receiving its own child stream spawned from the caller's generator.
The block layout depends only on the replica count, never on the number of
workers, so results are bit-identical for any ``workers``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

import numpy as np

BLOCK = 25_000


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def block_sizes(n: int, block: int = BLOCK) -> list[int]:
    full, rest = divmod(int(n), block)
    return [block] * full + ([rest] if rest else [])


def block_map(fn: Callable, n: int, rng: np.random.Generator, *args,
              workers: int = 1, block: int = BLOCK) -> list:
    """Call ``fn(size, child_rng, *args)`` for every block of ``n`` replicas.

    Results come back in block order.  ``fn`` must be a module-level callable
    when ``workers > 1``.
    """
    sizes = block_sizes(n, block)
    children = rng.spawn(len(sizes))
    if workers <= 1 or len(sizes) <= 1:
        return [fn(s, g, *args) for s, g in zip(sizes, children)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, s, g, *args) for s, g in zip(sizes, children)]
        return [f.result() for f in futures]


def pairwise_sum(values: Sequence[float]) -> float:
    """Tree reduction; the summation order is fixed by ``len(values)`` alone."""
    vals = list(values)
    if not vals:
        return 0.0
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]

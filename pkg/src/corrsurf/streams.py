"""Deterministic random-number streams for parallel Monte Carlo.

All randomness descends from one explicit 64-bit master seed.  Task-level
streams are derived by hashing a text label together with the seed, so every
pipeline stage gets an independent stream that is reproducible across runs,
platforms and worker counts.

Paths are organised in fixed blocks of ``BLOCK`` paths.  Block ``b`` owns a
counter-based Philox generator keyed by ``(task seed, b)``.  Samplers always
draw full-width block vectors in a fixed call order (one vector per time
step), so the values seen by path ``i`` depend only on
``(seed, i // BLOCK, i % BLOCK)`` and the draw schedule -- never on the total
path count or on how blocks are distributed over workers.
"""
from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, Sequence

import numpy as np

BLOCK = 4096


def task_seed(seed: int, label: str) -> int:
    """Derive a 64-bit task seed from the master seed and a stable label."""
    digest = hashlib.blake2b(
        label.encode("utf-8"),
        digest_size=8,
        key=int(seed).to_bytes(8, "little", signed=False),
    ).digest()
    return int.from_bytes(digest, "little")


def block_rng(seed: int, block_index: int) -> np.random.Generator:
    """Counter-based generator owned by one block of ``BLOCK`` paths."""
    key = np.array([seed, block_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def block_ranges(n_paths: int) -> list[tuple[int, int, int]]:
    """(block index, first path, number of paths kept) covering ``n_paths``."""
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    out = []
    for b in range(0, (n_paths + BLOCK - 1) // BLOCK):
        lo = b * BLOCK
        out.append((b, lo, min(BLOCK, n_paths - lo)))
    return out


def map_blocks(
    seed: int,
    n_paths: int,
    block_fn: Callable[[np.random.Generator, int], np.ndarray],
    n_threads: int = 1,
) -> np.ndarray:
    """Run ``block_fn(rng, rows_kept)`` per block and concatenate in block order.

    ``block_fn`` must draw full-``BLOCK``-width vectors internally and return
    only the first ``rows_kept`` entries (axis 0); that keeps path values
    independent of ``n_paths``.  Results are concatenated in ascending block
    order regardless of ``n_threads``, so output is bit-reproducible.
    """
    ranges = block_ranges(n_paths)
    if n_threads <= 1 or len(ranges) == 1:
        parts = [block_fn(block_rng(seed, b), keep) for b, _, keep in ranges]
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            parts = list(
                pool.map(lambda r: block_fn(block_rng(seed, r[0]), r[2]), ranges)
            )
    return np.concatenate(parts, axis=0)

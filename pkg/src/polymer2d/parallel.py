"""Deterministic block-parallel execution.

Work is split into fixed-size blocks of absolute sample indices; every
sample derives its randomness from its absolute index, so the partition
into blocks and the number of workers cannot change any value.  Block
results are combined in block order, making aggregates bitwise
reproducible for any worker count.
"""

import multiprocessing as mp


def run_blocks(worker, total, block_size, workers, args=()):
    """Apply ``worker(lo, hi, *args)`` over [0, total) in fixed blocks."""
    blocks = [(lo, min(lo + block_size, total))
              for lo in range(0, total, block_size)]
    if workers is None or workers <= 1 or len(blocks) <= 1:
        return [worker(lo, hi, *args) for lo, hi in blocks]
    ctx = mp.get_context("fork")
    with ctx.Pool(processes=min(workers, len(blocks))) as pool:
        return pool.starmap(worker, [(lo, hi) + tuple(args)
                                     for lo, hi in blocks])

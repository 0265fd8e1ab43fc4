"""Counter-based random streams.

Every stream is a Philox generator whose key is derived from the master seed
plus a tuple of integer labels (prime, block index, worker index, ...), so any
sub-stream can be regenerated in isolation and workers never coordinate.
"""
import numpy as np


def stream(seed: int, *labels: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, labels)])
    key = ss.generate_state(2, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def worker_streams(seed: int, workers: int) -> list[np.random.Generator]:
    return [stream(seed, 0xC0FFEE, w) for w in range(workers)]

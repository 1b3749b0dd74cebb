"""Counter-based random streams built on the splitmix64 finalizer.

Every draw is a pure function of ``(seed, stream ids..., counter)``, so a
stage or a shuffle can be regenerated without replaying earlier ones. The
numba kernels carry a bit-identical uint64 copy of ``mix64``.
"""

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, *ids: int) -> int:
    """Derive an independent stream key from a seed and integer stream ids."""
    key = mix64(int(seed) & MASK64)
    for i in ids:
        key = mix64((key + (int(i) & MASK64)) & MASK64)
    return key


def draw(key: int, counter: int) -> int:
    return mix64((key + counter) & MASK64)


def subsample_indices(seed: int, stage: int, n: int, k: int) -> np.ndarray:
    """``k`` distinct row indices out of ``n`` for boosting stage ``stage``.

    Partial Fisher-Yates on the stream ``(seed, stage)``; returned sorted so
    downstream sums run in row order.
    """
    key = stream_key(seed, stage)
    idx = list(range(n))
    for i in range(k):
        j = i + draw(key, i) % (n - i)
        idx[i], idx[j] = idx[j], idx[i]
    return np.sort(np.asarray(idx[:k], dtype=np.int64))


def permutation(seed: int, feature: int, shuffle: int, n: int) -> np.ndarray:
    """Full Fisher-Yates permutation of ``range(n)`` on stream (seed, feature, shuffle)."""
    key = stream_key(seed, feature, shuffle)
    idx = list(range(n))
    for c, i in enumerate(range(n - 1, 0, -1)):
        j = draw(key, c) % (i + 1)
        idx[i], idx[j] = idx[j], idx[i]
    return np.asarray(idx, dtype=np.int64)

"""Small array kernels shared by the pruning dynamic programs."""
from __future__ import annotations

import numpy as np

INF = np.iinfo(np.int64).max // 4


def min_plus(a: np.ndarray, b: np.ndarray, length: int | None = None) -> np.ndarray:
    """``c[k] = min_{i+j=k} a[i] + b[j]``, truncated to ``length`` entries."""
    n = len(a) + len(b) - 1
    if length is None:
        length = n
    out = np.full(length, INF, dtype=np.int64)
    if len(a) == 0 or len(b) == 0:
        return out
    # iterate over the shorter operand; each step is a vectorized shift
    if len(a) > len(b):
        a, b = b, a
    for i, ai in enumerate(a):
        if ai >= INF or i >= length:
            continue
        m = min(len(b), length - i)
        seg = ai + b[:m]
        np.minimum(out[i:i + m], seg, out=out[i:i + m])
    out[out >= INF] = INF
    return out


def max_plus(a: np.ndarray, b: np.ndarray, length: int) -> np.ndarray:
    """``c[k] = max_{i+j=k} a[i] + b[j]`` with ``-INF`` as the absorbing value."""
    return -min_plus(-a, -b, length)


def suffix_min(a: np.ndarray) -> np.ndarray:
    return np.minimum.accumulate(a[::-1])[::-1].copy()


def shifted(a: np.ndarray, offset: int, length: int) -> np.ndarray:
    """Place ``a`` starting at index ``offset`` inside an INF array of ``length``."""
    out = np.full(length, INF, dtype=np.int64)
    if offset < length:
        m = min(len(a), length - offset)
        out[offset:offset + m] = a[:m]
    return out


def as_optional(x) -> int | None:
    x = int(x)
    return None if x >= INF else x

"""Pure-numpy Walsh-Hadamard butterfly, used when the compiled kernel is absent.

Same contract as ``fjlt._fwht_cy``: in-place, natural ordering, unnormalized.
The butterfly stages are vectorized with reshaped views, so this stays
O(n log n) but pays numpy overhead per stage.
"""

import numpy as np


def fwht(x):
    n = x.shape[0]
    h = 1
    while h < n:
        v = x.reshape(n // (2 * h), 2, h)
        a = v[:, 0, :].copy()
        v[:, 0, :] += v[:, 1, :]
        v[:, 1, :] = a - v[:, 1, :]
        h *= 2


def fwht_batch(xs):
    m, n = xs.shape
    h = 1
    while h < n:
        v = xs.reshape(m, n // (2 * h), 2, h)
        a = v[:, :, 0, :].copy()
        v[:, :, 0, :] += v[:, :, 1, :]
        v[:, :, 1, :] = a - v[:, :, 1, :]
        h *= 2

"""Heavy/light split of a vector around its r largest-magnitude coordinates.

heavy + light == y exactly (entries are moved, never recomputed), supports
are disjoint, and on the unit ball the light part obeys
||light||_inf <= 1/sqrt(r).
"""

from dataclasses import dataclass

import numpy as np

from fjlt.hadamard import as_vector

__all__ = ["HeavyLightSplit", "split_heavy_light"]


@dataclass(frozen=True)
class HeavyLightSplit:
    heavy: np.ndarray
    light: np.ndarray
    heavy_support: np.ndarray
    r: int


def split_heavy_light(y, r: int) -> HeavyLightSplit:
    """Split y into its r largest-magnitude coordinates and the rest.

    Ties among equal magnitudes go to the lowest index. Zero coordinates are
    never counted as heavy, so a vector with fewer than r nonzeros gets a
    smaller support.
    """
    y = as_vector(y)
    n = y.shape[0]
    if not (1 <= r <= n):
        raise ValueError(f"r={r} outside [1, {n}]")

    mag = np.abs(y)
    if r == n:
        support = np.flatnonzero(mag)
    else:
        # Partial selection: threshold at the r-th largest magnitude, then
        # fill boundary ties by lowest index. Expected O(n), deterministic.
        threshold = np.partition(mag, n - r)[n - r]
        above = np.flatnonzero(mag > threshold)
        need = r - above.shape[0]
        at = np.flatnonzero(mag == threshold)[:need]
        support = np.sort(np.concatenate([above, at]))
        support = support[mag[support] > 0]

    heavy = np.zeros_like(y)
    heavy[support] = y[support]
    light = y.copy()
    light[support] = 0.0
    return HeavyLightSplit(heavy=heavy, light=light, heavy_support=support, r=r)

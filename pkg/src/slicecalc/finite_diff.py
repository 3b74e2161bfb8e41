"""Finite-difference stencils."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


def fornberg_weights(offsets, order: int, x0: float = 0.0) -> np.ndarray:
    """Weights w with f^(order)(x0) ~ sum_k w_k f(offsets_k).

    Fornberg's recursion (Math. Comp. 51, 1988), valid for arbitrary
    distinct nodes.
    """
    z = np.asarray(offsets, float)
    n = len(z)
    if order >= n:
        raise ValueError("need more nodes than the derivative order")
    c = np.zeros((n, order + 1))
    c1 = 1.0
    c4 = z[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = z[i] - x0
        for j in range(i):
            c3 = z[i] - z[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


@lru_cache(maxsize=None)
def central_stencil(order: int, accuracy: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Integer offsets and weights of a centered stencil (unit spacing)."""
    if order == 0:
        return np.array([0]), np.array([1.0])
    half = (order + accuracy - 1) // 2
    offsets = np.arange(-half, half + 1)
    w = fornberg_weights(offsets, order)
    w[np.abs(w) < 1e-14 * np.max(np.abs(w))] = 0.0
    keep = w != 0
    return offsets[keep], w[keep]

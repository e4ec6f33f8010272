"""Numba-jitted twins of the hot covariance kernels.

Explicit loops fuse the distance and exponential passes and avoid the large
pairwise temporaries the numpy path allocates. fastmath stays off so both
backends follow IEEE semantics.
"""

from __future__ import annotations

import numpy as np
from numba import njit

BACKEND = "numba"


@njit(cache=True)
def ard_sq_dists(XA, XB, lengthscales):
    n, d = XA.shape
    m = XB.shape[0]
    out = np.empty((n, m))
    for a in range(n):
        for b in range(m):
            s = 0.0
            for i in range(d):
                diff = (XA[a, i] - XB[b, i]) / lengthscales[i]
                s += diff * diff
            out[a, b] = s
    return out


@njit(cache=True)
def se_kernel_matrix(XA, XB, lengthscales, signal_variance):
    n, d = XA.shape
    m = XB.shape[0]
    out = np.empty((n, m))
    for a in range(n):
        for b in range(m):
            s = 0.0
            for i in range(d):
                diff = (XA[a, i] - XB[b, i]) / lengthscales[i]
                s += diff * diff
            out[a, b] = signal_variance * np.exp(-0.5 * s)
    return out


@njit(cache=True)
def weighted_sqdiff_sums(X, W, lengthscales):
    n, d = X.shape
    out = np.zeros(d)
    for a in range(n):
        for b in range(n):
            w = W[a, b]
            for i in range(d):
                diff = X[a, i] - X[b, i]
                out[i] += w * diff * diff
    for i in range(d):
        out[i] /= lengthscales[i] * lengthscales[i]
    return out


def warmup() -> None:
    """Trigger JIT compilation of all kernels on a tiny problem."""
    x = np.ones((2, 2))
    ls = np.ones(2)
    ard_sq_dists(x, x, ls)
    se_kernel_matrix(x, x, ls, 1.0)
    weighted_sqdiff_sums(x, np.ones((2, 2)), ls)

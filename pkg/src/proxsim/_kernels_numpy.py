"""Pure-numpy implementations of the hot covariance kernels.

Always importable; selected as the active backend when PROXSIM_JIT=0 or
numba is unavailable. Kept signature-identical to the numba twin so the
benchmark and parity tests can drive both.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def ard_sq_dists(XA: np.ndarray, XB: np.ndarray, lengthscales: np.ndarray) -> np.ndarray:
    """Pairwise squared distances after per-dimension lengthscale division."""
    A = XA / lengthscales
    B = XB / lengthscales
    aa = np.einsum("ij,ij->i", A, A)
    bb = np.einsum("ij,ij->i", B, B)
    d = aa[:, None] + bb[None, :] - 2.0 * (A @ B.T)
    np.maximum(d, 0.0, out=d)
    return d


def se_kernel_matrix(
    XA: np.ndarray, XB: np.ndarray, lengthscales: np.ndarray, signal_variance: float
) -> np.ndarray:
    """Squared-exponential ARD kernel matrix between two row sets."""
    return signal_variance * np.exp(-0.5 * ard_sq_dists(XA, XB, lengthscales))


def weighted_sqdiff_sums(X: np.ndarray, W: np.ndarray, lengthscales: np.ndarray) -> np.ndarray:
    """Per-dimension sums g_i = sum_ab W[a,b] * ((X[a,i]-X[b,i]) / ls_i)^2.

    The contraction behind the lengthscale gradient of the log marginal
    likelihood. Expanded as r_a x_a^2 + c_b x_b^2 - 2 x^T W x to stay in
    BLAS-friendly operations.
    """
    r = W.sum(axis=1)
    c = W.sum(axis=0)
    X2 = X * X
    t = X2.T @ r + X2.T @ c - 2.0 * np.einsum("ai,ai->i", X, W @ X)
    return t / (lengthscales * lengthscales)

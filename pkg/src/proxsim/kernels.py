"""Backend selection for the hot covariance kernels.

Set PROXSIM_JIT=0 to force the pure-numpy path; any other value (or unset)
uses the numba-jitted kernels when numba imports cleanly. The choice is made
once at import time. ``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os


def _jit_requested() -> bool:
    return os.environ.get("PROXSIM_JIT", "1").strip().lower() not in ("0", "false", "off", "no")


JIT_ENABLED = False
if _jit_requested():
    try:
        from . import _kernels_numba as _impl

        JIT_ENABLED = True
    except ImportError:
        from . import _kernels_numpy as _impl
else:
    from . import _kernels_numpy as _impl

BACKEND = _impl.BACKEND

ard_sq_dists = _impl.ard_sq_dists
se_kernel_matrix = _impl.se_kernel_matrix
weighted_sqdiff_sums = _impl.weighted_sqdiff_sums


def warmup() -> None:
    """Pre-compile the jitted kernels (no-op on the numpy backend)."""
    if JIT_ENABLED:
        _impl.warmup()

"""Seeded space-filling designs over a domain of applicability.

Numeric slots get Latin hypercube stratification (every 1-D projection puts
exactly one point into each of n equal bins); categorical variables are
sampled uniformly over their levels. Initial designs and candidate pools
draw from distinct seed streams so they never coincide.
"""

from __future__ import annotations

import numpy as np

from .domain import DomainOfApplicability, PredictionSet

_STREAM_INITIAL = 1
_STREAM_POOL = 2


def _lhs_raw(domain: DomainOfApplicability, n: int, rng: np.random.Generator) -> np.ndarray:
    """Raw-space encoded design matrix; integer slots rounded to the grid."""
    if n < 1:
        raise ValueError("design size must be at least 1")
    X = np.zeros((n, domain.encoded_dim))
    off = 0
    for v in domain.inputs:
        if v.kind == "categorical":
            idx = rng.integers(0, len(v.levels), size=n)
            X[np.arange(n), off + idx] = 1.0
            off += len(v.levels)
        else:
            strata = (rng.permutation(n) + rng.random(n)) / n
            X[:, off] = v.lower + strata * (v.upper - v.lower)
            off += 1
    return domain.round_integer_slots(X)


def initial_design(domain: DomainOfApplicability, n: int, seed: int) -> np.ndarray:
    """Latin hypercube design of n raw-space encoded points."""
    rng = np.random.default_rng([seed, _STREAM_INITIAL])
    return _lhs_raw(domain, n, rng)


def candidate_pool(
    domain: DomainOfApplicability,
    n: int,
    seed: int,
    *,
    iteration: int = 0,
    exclude: np.ndarray | None = None,
) -> PredictionSet:
    """Unlabelled pool for one acquisition round.

    Uses a seed stream distinct from initial_design and keyed by iteration,
    so successive rounds see fresh pools. Rows exactly matching any row of
    ``exclude`` (typically the current training inputs) are dropped.
    """
    rng = np.random.default_rng([seed, _STREAM_POOL, iteration])
    X = _lhs_raw(domain, n, rng)
    if exclude is not None and len(exclude):
        exclude = np.atleast_2d(np.asarray(exclude, dtype=float))
        seen = {row.tobytes() for row in np.ascontiguousarray(exclude)}
        keep = [i for i, row in enumerate(np.ascontiguousarray(X)) if row.tobytes() not in seen]
        X = X[keep]
    return PredictionSet(domain, X)

"""Ordinary-least-squares surrogate: intercept plus one weight per slot.

Coefficients are reported in raw encoded space (the fit itself runs on the
scaled design matrix for conditioning). Multi-output training sets get one
independent regression per output, stacked in a single model object.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import DomainOfApplicability, PredictionSet, TrainingSet
from .errors import DimensionMismatch, RankDeficient, TooFewPoints
from .gp import Prediction, _check_frozen


@dataclass(frozen=True)
class LinearModel:
    """OLS fit per output: mean = beta0 + beta . x, homoscedastic variance."""

    domain: DomainOfApplicability
    beta0: np.ndarray   # (m,)
    beta: np.ndarray    # (m, D)
    sigma2: np.ndarray  # (m,) residual variance estimates
    X_raw: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        for name in ("beta0", "beta", "sigma2", "X_raw", "Y"):
            object.__setattr__(self, name, _check_frozen(getattr(self, name)))
        if self.beta.shape[1] != self.domain.encoded_dim:
            raise DimensionMismatch("beta length must equal the encoded dimension")

    @property
    def n_outputs(self) -> int:
        return self.beta.shape[0]

    def predict_arrays(self, X_raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        X_raw = np.atleast_2d(np.asarray(X_raw, dtype=float))
        if X_raw.shape[1] != self.domain.encoded_dim:
            raise DimensionMismatch(
                f"rows have {X_raw.shape[1]} slots, domain encodes {self.domain.encoded_dim}"
            )
        mean = self.beta0 + X_raw @ self.beta.T
        var = np.broadcast_to(self.sigma2, mean.shape).copy()
        return mean, var


def fit_linear(ts: TrainingSet) -> LinearModel:
    """Fit ordinary least squares per output column.

    Needs at least D + 1 rows and a full-rank design matrix. Note that a
    categorical input makes the design singular by construction (its one-hot
    block sums to the intercept column); use the GP for such domains.
    """
    n = len(ts)
    d = ts.domain.encoded_dim
    if n < d + 1:
        raise TooFewPoints(f"need at least {d + 1} rows for {d} slots, got {n}")
    Xs = ts.domain.scale(ts.X)
    A = np.column_stack([np.ones(n), Xs])
    rank = np.linalg.matrix_rank(A)
    if rank < d + 1:
        raise RankDeficient(f"design matrix rank {rank} < {d + 1}")

    coef, _, _, _ = np.linalg.lstsq(A, ts.Y, rcond=None)
    resid = ts.Y - A @ coef
    dof = max(1, n - d - 1)
    sigma2 = (resid**2).sum(axis=0) / dof

    # map scaled-space coefficients back to raw units
    shift = ts.domain._shift
    span = ts.domain._span
    beta_raw = (coef[1:, :] / span[:, None]).T
    beta0_raw = coef[0, :] - (coef[1:, :] * (shift / span)[:, None]).sum(axis=0)

    return LinearModel(
        domain=ts.domain,
        beta0=beta0_raw,
        beta=beta_raw,
        sigma2=sigma2,
        X_raw=ts.X,
        Y=ts.Y,
    )


def predict_linear(model: LinearModel, pred: PredictionSet) -> list[Prediction]:
    """Mean beta0 + beta . x with constant variance sigma2 per output."""
    if pred.domain.encoded_dim != model.domain.encoded_dim:
        raise DimensionMismatch("prediction set domain does not match the model")
    mean, var = model.predict_arrays(pred.X)
    return [Prediction(mean=m, variance=v) for m, v in zip(mean, var)]

"""Accuracy and calibration metrics for fitted surrogates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import TrainingSet
from .errors import EmptyHoldout

Z95 = 1.959964  # two-sided 95% normal quantile


@dataclass(frozen=True)
class Metrics:
    """Per-output rmse, mae, r2 and 95% interval coverage."""

    rmse: tuple[float, ...]
    mae: tuple[float, ...]
    r2: tuple[float, ...]
    picp95: tuple[float, ...]

    def to_dict(self, output_names: tuple[str, ...] | None = None) -> dict:
        names = output_names or tuple(str(i) for i in range(len(self.rmse)))
        return {
            name: {
                "rmse": self.rmse[j],
                "mae": self.mae[j],
                "r2": self.r2[j],
                "picp95": self.picp95[j],
            }
            for j, name in enumerate(names)
        }

    @classmethod
    def from_dict(cls, d: dict, output_names: tuple[str, ...]) -> "Metrics":
        return cls(
            rmse=tuple(d[n]["rmse"] for n in output_names),
            mae=tuple(d[n]["mae"] for n in output_names),
            r2=tuple(d[n]["r2"] for n in output_names),
            picp95=tuple(d[n]["picp95"] for n in output_names),
        )

    @property
    def worst_rmse(self) -> float:
        return max(self.rmse)


def evaluate(model, holdout: TrainingSet) -> Metrics:
    """Evaluate any model exposing ``predict_arrays`` on labelled holdout rows.

    picp95 is the fraction of labels falling inside mean +- 1.959964 * sigma,
    using the model's own predictive variance.
    """
    if len(holdout) == 0:
        raise EmptyHoldout("holdout set is empty")
    mean, var = model.predict_arrays(holdout.X)
    err = mean - holdout.Y
    rmse = np.sqrt((err**2).mean(axis=0))
    mae = np.abs(err).mean(axis=0)
    ss_res = (err**2).sum(axis=0)
    ss_tot = ((holdout.Y - holdout.Y.mean(axis=0)) ** 2).sum(axis=0)
    r2 = np.empty_like(rmse)
    for j in range(len(r2)):
        if ss_tot[j] > 0:
            r2[j] = 1.0 - ss_res[j] / ss_tot[j]
        else:
            r2[j] = 1.0 if ss_res[j] <= 1e-30 else 0.0
    half = Z95 * np.sqrt(var)
    inside = np.abs(err) <= half
    picp = inside.mean(axis=0)
    return Metrics(
        rmse=tuple(float(v) for v in rmse),
        mae=tuple(float(v) for v in mae),
        r2=tuple(float(v) for v in r2),
        picp95=tuple(float(v) for v in picp),
    )

"""Model persistence as portable JSON.

A serialized GP stores hyperparameters and training data only; the
Cholesky factor is recomputed on load so documents stay portable across
machines and BLAS builds.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .domain import DomainOfApplicability, TrainingSet
from .gp import GPHyperparameters, GPModel, refit_gp
from .linear import LinearModel


def model_to_dict(model) -> dict:
    if isinstance(model, GPModel):
        return {
            "kind": "gp",
            "domain": model.domain.to_dict(),
            "hyperparameters": [t.to_dict() for t in model.hyperparameters],
            "training": {"X": model.X_raw.tolist(), "Y": model.Y.tolist()},
            "diagnostics": {"lml": list(model.lml), "jitter": list(model.jitter)},
        }
    if isinstance(model, LinearModel):
        return {
            "kind": "linear",
            "domain": model.domain.to_dict(),
            "coefficients": {
                "beta0": model.beta0.tolist(),
                "beta": model.beta.tolist(),
                "sigma2": model.sigma2.tolist(),
            },
            "training": {"X": model.X_raw.tolist(), "Y": model.Y.tolist()},
            "diagnostics": {},
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(doc: dict):
    domain = DomainOfApplicability.from_dict(doc["domain"])
    X = np.asarray(doc["training"]["X"], dtype=float)
    Y = np.asarray(doc["training"]["Y"], dtype=float)
    if doc["kind"] == "gp":
        hypers = tuple(GPHyperparameters.from_dict(h) for h in doc["hyperparameters"])
        return refit_gp(TrainingSet(domain, X, Y), hypers)
    if doc["kind"] == "linear":
        c = doc["coefficients"]
        return LinearModel(
            domain=domain,
            beta0=np.asarray(c["beta0"], dtype=float),
            beta=np.asarray(c["beta"], dtype=float),
            sigma2=np.asarray(c["sigma2"], dtype=float),
            X_raw=X,
            Y=Y,
        )
    raise ValueError(f"unknown model kind {doc['kind']!r}")


def save_model(model, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), sort_keys=True, indent=1))


def load_model(path: str | Path):
    return model_from_dict(json.loads(Path(path).read_text()))

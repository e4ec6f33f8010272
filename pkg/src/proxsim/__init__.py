"""proxsim: fast surrogate metamodels for expensive black-box simulators.

Gaussian-process and linear surrogates, seeded active-learning campaigns
with journaled state, composable desk-scale simulators, log ingestion, and
a CLI plus HTTP API for what-if exploration of KPI trade-offs.
"""

from .campaign import (
    Campaign,
    CampaignConfig,
    CampaignState,
    acquire,
    load_campaign,
    resume_campaign,
    run_campaign,
)
from .design import candidate_pool, initial_design
from .domain import (
    DomainOfApplicability,
    PredictionSet,
    TrainingSet,
    VariableSpec,
    append_labeled,
)
from .gp import (
    GPHyperparameters,
    GPModel,
    Prediction,
    fit_gp,
    kernel,
    log_marginal_likelihood,
    optimize_hyperparameters,
    predict_gp,
    refit_gp,
)
from .ingest import IngestReport, LogSchema, ingest_logs, load_log_schema
from .linear import LinearModel, fit_linear, predict_linear
from .metrics import Metrics, evaluate
from .serialize import load_model, save_model
from .simulators import (
    CombinedOutput,
    CombinerSpec,
    FunctionSimulator,
    Simulator,
    SubprocessSimulator,
    Wire,
    WiringSpec,
    atm_slot_overload,
    branin,
    builtin_simulators,
    compose_parallel,
    compose_serial,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "Campaign",
    "CampaignConfig",
    "CampaignState",
    "CombinedOutput",
    "CombinerSpec",
    "DomainOfApplicability",
    "FunctionSimulator",
    "GPHyperparameters",
    "GPModel",
    "IngestReport",
    "LinearModel",
    "LogSchema",
    "Metrics",
    "Prediction",
    "PredictionSet",
    "Simulator",
    "SubprocessSimulator",
    "TrainingSet",
    "VariableSpec",
    "Wire",
    "WiringSpec",
    "acquire",
    "append_labeled",
    "atm_slot_overload",
    "branin",
    "builtin_simulators",
    "candidate_pool",
    "compose_parallel",
    "compose_serial",
    "evaluate",
    "fit_gp",
    "fit_linear",
    "ingest_logs",
    "initial_design",
    "kernel",
    "load_campaign",
    "load_log_schema",
    "load_model",
    "log_marginal_likelihood",
    "optimize_hyperparameters",
    "predict_gp",
    "predict_linear",
    "refit_gp",
    "resume_campaign",
    "run_campaign",
    "save_model",
    "simulate",
]

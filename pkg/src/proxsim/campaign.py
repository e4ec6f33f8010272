"""The active-learning campaign loop: design, acquire, simulate, refit.

A campaign bootstraps from a Latin hypercube design (plus an optional
simulated holdout used for error-based stopping and iteration metrics),
then cycles: fresh candidate pool, acquisition, simulation, refit. Every
event lands in an append-only journal from which the campaign can be
reconstructed and resumed. Given a seed and a deterministic simulator the
whole run, journal included, is reproducible byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .design import candidate_pool, initial_design, _lhs_raw
from .domain import DomainOfApplicability, PredictionSet, TrainingSet, append_labeled
from .errors import (
    BatchTooLarge,
    CorruptJournal,
    DomainMismatch,
    EmptyPool,
    InvalidConfig,
    SimulatorFailure,
)
from .gp import GPHyperparameters, GPModel, fit_gp, refit_gp
from .journal import JournalWriter, read_journal
from .metrics import Metrics, evaluate
from .simulators import Simulator

ACQUISITIONS = ("max_variance", "random")
STOP_REASONS = ("budget_exhausted", "iterations_reached", "rmse_met", "manual")

_STREAM_HOLDOUT = 11
_STREAM_SIM = 12
_STREAM_OPT = 13
_STREAM_RANDOM_ACQ = 14

DEFAULT_HOLDOUT_SIZE = 50


@dataclass(frozen=True)
class CampaignConfig:
    """Knobs of one campaign run; at least one stopping criterion required."""

    initial_design_size: int = 10
    candidate_pool_size: int = 1000
    batch_size: int = 1
    acquisition: str = "max_variance"
    max_simulator_calls: int | None = None
    max_iterations: int | None = None
    rmse_threshold: float | None = None
    holdout_size: int | None = None
    seed: int = 0
    optimize_hyperparameters_every: int = 1

    def validate(self) -> None:
        if self.initial_design_size < 1:
            raise InvalidConfig("initial_design_size", "must be a positive integer")
        if self.candidate_pool_size < 1:
            raise InvalidConfig("candidate_pool_size", "must be a positive integer")
        if self.batch_size < 1:
            raise InvalidConfig("batch_size", "must be a positive integer")
        if self.acquisition not in ACQUISITIONS:
            raise InvalidConfig("acquisition", f"must be one of {ACQUISITIONS}")
        if self.optimize_hyperparameters_every < 1:
            raise InvalidConfig("optimize_hyperparameters_every", "must be a positive integer")
        if (
            self.max_simulator_calls is None
            and self.max_iterations is None
            and self.rmse_threshold is None
        ):
            raise InvalidConfig("stopping", "at least one stopping criterion must be set")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise InvalidConfig("max_iterations", "must be >= 0")
        if self.rmse_threshold is not None and not self.rmse_threshold > 0:
            raise InvalidConfig("rmse_threshold", "must be > 0")
        if self.holdout_size is not None and self.holdout_size < 0:
            raise InvalidConfig("holdout_size", "must be >= 0")
        if self.rmse_threshold is not None and self.effective_holdout_size == 0:
            raise InvalidConfig("holdout_size", "rmse_threshold stopping needs a holdout set")
        if self.max_simulator_calls is not None:
            floor = self.initial_design_size + self.effective_holdout_size
            if self.max_simulator_calls < floor:
                raise InvalidConfig(
                    "max_simulator_calls",
                    f"must cover the initial design plus holdout (>= {floor})",
                )

    @property
    def effective_holdout_size(self) -> int:
        if self.holdout_size is not None:
            return self.holdout_size
        return DEFAULT_HOLDOUT_SIZE if self.rmse_threshold is not None else 0

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidConfig(sorted(unknown)[0], "unknown configuration field")
        try:
            cfg = cls(**d)
        except TypeError as exc:
            raise InvalidConfig("config", str(exc))
        def is_int(v) -> bool:
            return isinstance(v, int) and not isinstance(v, bool)

        for f in fields(cls):
            v = getattr(cfg, f.name)
            if f.name in ("initial_design_size", "candidate_pool_size", "batch_size",
                          "seed", "optimize_hyperparameters_every") and not is_int(v):
                raise InvalidConfig(f.name, "must be an integer")
            if f.name in ("max_simulator_calls", "max_iterations", "holdout_size") and not (
                v is None or is_int(v)
            ):
                raise InvalidConfig(f.name, "must be an integer or null")
            if f.name == "rmse_threshold" and not (
                v is None or (isinstance(v, (int, float)) and not isinstance(v, bool))
            ):
                raise InvalidConfig(f.name, "must be a number or null")
            if f.name == "acquisition" and not isinstance(v, str):
                raise InvalidConfig(f.name, "must be a string")
        cfg.validate()
        return cfg


@dataclass
class CampaignState:
    """Journaled progress of one campaign."""

    training_set: TrainingSet
    iteration: int = 0
    simulator_calls_used: int = 0
    metrics_history: list[tuple[int, Metrics]] = field(default_factory=list)
    hyperparameter_history: list[tuple[int, tuple[GPHyperparameters, ...]]] = field(
        default_factory=list
    )
    model: GPModel | None = None
    stop_reason: str | None = None
    holdout: TrainingSet | None = None


def acquire(
    model: GPModel,
    pool: PredictionSet,
    criterion: str,
    k: int,
    *,
    seed: int | Sequence[int] | None = None,
) -> np.ndarray:
    """Select k pool rows; returns their indices in pick order.

    max_variance greedily takes the candidate with the largest posterior
    variance summed over outputs (ties resolved toward the lowest index);
    each pick then excludes candidates within the diversity radius
    |pool|^(-1/D) in scaled space. random samples uniformly without
    replacement from the given seed.
    """
    n = len(pool)
    if n == 0:
        raise EmptyPool("candidate pool is empty")
    if k > n:
        raise BatchTooLarge(f"batch size {k} exceeds pool size {n}")
    if criterion == "random":
        rng = np.random.default_rng(seed)
        return rng.choice(n, size=k, replace=False)
    if criterion != "max_variance":
        raise InvalidConfig("acquisition", f"must be one of {ACQUISITIONS}")

    _, var = model.predict_arrays(pool.X)
    score = var.sum(axis=1)
    Xs = model.domain.scale(pool.X)
    d = Xs.shape[1]
    radius = n ** (-1.0 / d)
    available = np.ones(n, dtype=bool)
    near = np.zeros(n, dtype=bool)
    picks: list[int] = []
    for _ in range(k):
        cand = available & ~near
        if not cand.any():
            cand = available  # diversity radius exhausted the pool; relax it
        masked = np.where(cand, score, -np.inf)
        idx = int(np.argmax(masked))
        picks.append(idx)
        available[idx] = False
        dist = np.sqrt(((Xs - Xs[idx]) ** 2).sum(axis=1))
        near |= dist < radius
    return np.asarray(picks, dtype=int)


def _derive_seed(*parts: int) -> int:
    """Stable 63-bit child seed from integer parts."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0] >> 1)


class Campaign:
    """Stepping engine behind run_campaign, the CLI and the HTTP service."""

    def __init__(
        self,
        simulator: Simulator,
        domain: DomainOfApplicability | None,
        config: CampaignConfig,
        journal_path: str | Path,
        _resume: tuple[CampaignState, bool] | None = None,
    ):
        domain = domain if domain is not None else simulator.domain
        if domain != simulator.domain:
            raise DomainMismatch("campaign domain must match the simulator domain")
        config.validate()
        self.simulator = simulator
        self.domain = domain
        self.config = config
        if _resume is None:
            self.state = CampaignState(training_set=TrainingSet(domain))
            self._bootstrapped = False
            self.journal = JournalWriter(journal_path, append=False)
            self.journal.write(
                {
                    "event": "init",
                    "iteration": 0,
                    "simulator_id": simulator.id,
                    "domain": domain.to_dict(),
                    "config": config.to_dict(),
                }
            )
        else:
            self.state, self._bootstrapped = _resume
            self.journal = JournalWriter(journal_path, append=True)

    # -- plumbing ------------------------------------------------------------

    def _simulate_one(self, x_raw: np.ndarray, phase: str, iteration: int, index: int) -> np.ndarray | None:
        """Run one point, journal the outcome, debit the budget.

        Returns the output vector, or None when the simulator failed (the
        point is skipped but the call still counts against the budget).
        """
        point = self.domain.decode(x_raw)
        phase_id = {"holdout": 0, "initial": 1, "acquired": 2}[phase]
        seed = _derive_seed(self.config.seed, _STREAM_SIM, iteration, phase_id, index)
        record = {
            "event": "simulate",
            "iteration": iteration,
            "phase": phase,
            "index": index,
            "inputs": point,
        }
        try:
            out = self.simulator.evaluate([point], seed=seed)
            out = np.atleast_2d(np.asarray(out, dtype=float))[0]
            record["outputs"] = dict(zip(self.domain.output_names, (float(v) for v in out)))
            self.journal.write(record)
            return out
        except SimulatorFailure as exc:
            record["error"] = str(exc.cause)
            self.journal.write(record)
            return None
        finally:
            self.state.simulator_calls_used += 1

    def _simulate_batch(self, X_raw: np.ndarray, phase: str, iteration: int,
                        indices: Sequence[int] | None = None) -> TrainingSet:
        collected = TrainingSet(self.domain)
        for j, row in enumerate(X_raw):
            idx = int(indices[j]) if indices is not None else j
            out = self._simulate_one(row, phase, iteration, idx)
            if out is not None:
                collected = append_labeled(collected, row[None, :], out[None, :])
        return collected

    def _fit(self, iteration: int) -> None:
        optimize = iteration % self.config.optimize_hyperparameters_every == 0
        seed = _derive_seed(self.config.seed, _STREAM_OPT, iteration)
        ts = self.state.training_set
        pinned = None
        if self.simulator.deterministic:
            # no observation noise to estimate; identical inputs would carry
            # identical labels, so only the first copy enters the factorization
            pinned = 1e-12
            _, first = np.unique(ts.X, axis=0, return_index=True)
            if len(first) < len(ts):
                keep = np.sort(first)
                ts = TrainingSet(self.domain, ts.X[keep], ts.Y[keep])
        if optimize or self.state.model is None:
            model = fit_gp(ts, None, optimize=True, seed=seed, pinned_noise=pinned)
        else:
            model = refit_gp(ts, self.state.model.hyperparameters)
        self.state.model = model
        self.state.hyperparameter_history.append((iteration, model.hyperparameters))
        self.journal.write(
            {
                "event": "fit",
                "iteration": iteration,
                "hyperparameters": [t.to_dict() for t in model.hyperparameters],
                "lml": list(model.lml),
            }
        )
        if self.state.holdout is not None and len(self.state.holdout):
            metrics = evaluate(model, self.state.holdout)
            self.state.metrics_history.append((iteration, metrics))
            self.journal.write(
                {
                    "event": "metrics",
                    "iteration": iteration,
                    "metrics": metrics.to_dict(self.domain.output_names),
                }
            )
            self._plateau_check(iteration)

    def _plateau_check(self, iteration: int) -> None:
        history = [m.worst_rmse for _, m in self.state.metrics_history]
        if len(history) < 6:
            return
        best_now = min(history)
        best_then = min(history[:-5])
        improvement = (best_then - best_now) / best_then if best_then > 0 else 0.0
        if improvement < 0.01:
            self.journal.write(
                {
                    "event": "warning",
                    "iteration": iteration,
                    "kind": "plateau",
                    "message": "best holdout RMSE improved < 1% over the last 5 iterations",
                }
            )

    def _stop_condition(self) -> str | None:
        cfg = self.config
        st = self.state
        if cfg.rmse_threshold is not None and st.metrics_history:
            if st.metrics_history[-1][1].worst_rmse <= cfg.rmse_threshold:
                return "rmse_met"
        if cfg.max_simulator_calls is not None:
            if st.simulator_calls_used + cfg.batch_size > cfg.max_simulator_calls:
                return "budget_exhausted"
        if cfg.max_iterations is not None and st.iteration >= cfg.max_iterations:
            return "iterations_reached"
        return None

    # -- the four-step loop ---------------------------------------------------

    def bootstrap(self) -> None:
        """Simulate the holdout and initial design, then fit the first model."""
        if self._bootstrapped:
            return
        h = self.config.effective_holdout_size
        if h > 0:
            rng = np.random.default_rng([self.config.seed, _STREAM_HOLDOUT])
            Xh = _lhs_raw(self.domain, h, rng)
            self.state.holdout = self._simulate_batch(Xh, "holdout", 0)
        X0 = initial_design(self.domain, self.config.initial_design_size, self.config.seed)
        self.state.training_set = self._simulate_batch(X0, "initial", 0)
        if len(self.state.training_set) == 0:
            raise SimulatorFailure(None, "every initial-design point failed to simulate")
        self._fit(0)
        self._bootstrapped = True

    def step(self) -> None:
        """One acquisition round: pool, select, simulate, append, refit."""
        it = self.state.iteration + 1
        pool = candidate_pool(
            self.domain,
            self.config.candidate_pool_size,
            self.config.seed,
            iteration=it,
            exclude=self.state.training_set.X,
        )
        k = min(self.config.batch_size, len(pool))
        if k == 0:
            raise EmptyPool("candidate pool is empty after excluding training rows")
        seed = _derive_seed(self.config.seed, _STREAM_RANDOM_ACQ, it)
        picked = acquire(self.state.model, pool, self.config.acquisition, k, seed=seed)
        picked = np.sort(picked)  # append in pool-index order
        self.journal.write(
            {
                "event": "acquire",
                "iteration": it,
                "criterion": self.config.acquisition,
                "pool_size": len(pool),
                "selected": [self.domain.decode(pool.X[i]) for i in picked],
            }
        )
        new = self._simulate_batch(pool.X[picked], "acquired", it, indices=picked)
        if len(new):
            self.state.training_set = append_labeled(self.state.training_set, new.X, new.Y)
        self.state.iteration = it
        self._fit(it)

    def advance(self, n: int) -> CampaignState:
        """Bootstrap if needed, then run up to n loop iterations."""
        self.bootstrap()
        done = 0
        while done < n:
            reason = self._stop_condition()
            if reason is not None:
                self._record_stop(reason)
                break
            self.step()
            done += 1
        return self.state

    def run(self) -> CampaignState:
        """Cycle until a stopping criterion fires."""
        self.bootstrap()
        while self.state.stop_reason is None:
            reason = self._stop_condition()
            if reason is not None:
                self._record_stop(reason)
                break
            self.step()
        return self.state

    def _record_stop(self, reason: str) -> None:
        self.state.stop_reason = reason
        self.journal.write(
            {"event": "stop", "iteration": self.state.iteration, "stop_reason": reason}
        )

    def stop(self, reason: str = "manual") -> CampaignState:
        if self.state.stop_reason is None:
            self._record_stop(reason)
        return self.state

    def close(self) -> None:
        self.journal.close()


def run_campaign(
    simulator: Simulator,
    domain: DomainOfApplicability | None,
    config: CampaignConfig,
    *,
    journal_path: str | Path,
) -> CampaignState:
    """Execute a full campaign to its stopping criterion, journaling every event."""
    campaign = Campaign(simulator, domain, config, journal_path)
    try:
        return campaign.run()
    finally:
        campaign.close()


def _replay(records: list[dict]) -> tuple[CampaignConfig, DomainOfApplicability, str, CampaignState, bool]:
    init = records[0]
    try:
        config = CampaignConfig.from_dict(init["config"])
        domain = DomainOfApplicability.from_dict(init["domain"])
        simulator_id = init["simulator_id"]
    except (KeyError, InvalidConfig, ValueError) as exc:
        raise CorruptJournal(f"invalid init record: {exc}")

    state = CampaignState(training_set=TrainingSet(domain))
    holdout = TrainingSet(domain)
    last_fit_hypers: tuple[GPHyperparameters, ...] | None = None
    names = domain.output_names
    try:
        for rec in records[1:]:
            event = rec["event"]
            if event == "simulate":
                state.simulator_calls_used += 1
                if "error" in rec:
                    continue
                x = domain.encode(rec["inputs"])
                y = np.array([[rec["outputs"][n] for n in names]])
                if rec["phase"] == "holdout":
                    holdout = append_labeled(holdout, x[None, :], y)
                else:
                    state.training_set = append_labeled(state.training_set, x[None, :], y)
            elif event == "fit":
                last_fit_hypers = tuple(
                    GPHyperparameters.from_dict(h) for h in rec["hyperparameters"]
                )
                state.iteration = rec["iteration"]
                state.hyperparameter_history.append((rec["iteration"], last_fit_hypers))
            elif event == "metrics":
                state.metrics_history.append(
                    (rec["iteration"], Metrics.from_dict(rec["metrics"], names))
                )
            elif event == "stop":
                state.stop_reason = rec["stop_reason"]
            # acquire and warning records carry no state
    except (KeyError, IndexError, ValueError) as exc:
        raise CorruptJournal(f"inconsistent journal record: {exc}")

    if len(holdout):
        state.holdout = holdout
    bootstrapped = last_fit_hypers is not None
    if not bootstrapped and state.simulator_calls_used > 0:
        # simulate records without a first fit: the run died mid-bootstrap,
        # and replaying it would double-debit the budget
        raise CorruptJournal("journal ends mid-bootstrap and cannot be resumed")
    if bootstrapped:
        state.model = refit_gp(state.training_set, last_fit_hypers)
    return config, domain, simulator_id, state, bootstrapped


def load_campaign(journal_path: str | Path, simulator: Simulator) -> Campaign:
    """Reconstruct a live campaign engine from its journal."""
    records = read_journal(journal_path)
    config, domain, simulator_id, state, bootstrapped = _replay(records)
    if simulator.id != simulator_id:
        raise DomainMismatch(f"journal was recorded with simulator {simulator_id!r}, got {simulator.id!r}")
    if simulator.domain != domain:
        raise DomainMismatch("simulator domain differs from the journaled domain")
    return Campaign(simulator, domain, config, journal_path, _resume=(state, bootstrapped))


def resume_campaign(
    journal_path: str | Path,
    simulator: Simulator,
    *,
    additional_simulator_calls: int | None = None,
    additional_iterations: int | None = None,
) -> CampaignState:
    """Rebuild a campaign from its journal and continue the cycle.

    Extra budget extends the journaled stopping limits; a stopped campaign
    with no extra budget is returned as-is. The appended events form a valid
    continuation of the same journal.
    """
    campaign = load_campaign(journal_path, simulator)
    cfg = campaign.config
    updates: dict = {}
    if additional_simulator_calls:
        base = cfg.max_simulator_calls if cfg.max_simulator_calls is not None else campaign.state.simulator_calls_used
        updates["max_simulator_calls"] = base + additional_simulator_calls
    if additional_iterations:
        base_it = cfg.max_iterations if cfg.max_iterations is not None else campaign.state.iteration
        updates["max_iterations"] = base_it + additional_iterations
    if updates:
        campaign.config = CampaignConfig(**{**cfg.to_dict(), **updates})
        campaign.state.stop_reason = None
    elif campaign.state.stop_reason is not None:
        campaign.close()
        return campaign.state
    try:
        return campaign.run()
    finally:
        campaign.close()

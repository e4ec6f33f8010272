"""HTTP JSON service for simulators, campaigns, prediction and sweeps.

All endpoints live under /api/v1 and speak raw-space values only. Error
bodies follow one shape: {"code", "message", "details"} with codes from a
closed set (not_found, unknown_simulator, invalid_config, invalid_request,
campaign_busy, campaign_stopped, no_model_yet, out_of_domain, bad_sweep).

Campaign persistence is the journal file itself: the server can restart
and resume any campaign from PROXSIM_DATA_DIR. Per campaign there is at
most one writer (advance); prediction and sweep endpoints are pure reads.
"""

from __future__ import annotations

import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .campaign import Campaign, CampaignConfig, load_campaign
from .domain import RawPoint
from .errors import (
    CorruptJournal,
    InvalidConfig,
    OutOfDomain,
    UnknownLevel,
    UnknownVariable,
)
from .simulators import Simulator, builtin_simulators

DEFAULT_DATA_DIR = "./proxsim_data"


class ApiFault(Exception):
    def __init__(self, status: int, code: str, message: str, details: dict | None = None):
        self.status = status
        self.code = code
        self.message = message
        self.details = details
        super().__init__(message)


@dataclass
class _Handle:
    engine: Campaign
    lock: threading.Lock = field(default_factory=threading.Lock)


def _simulator_info(sim: Simulator) -> dict:
    return {
        "id": sim.id,
        "domain": sim.domain.to_dict(),
        "deterministic": sim.deterministic,
        "cost_hint": sim.cost_hint,
    }


def _summary(campaign_id: str, handle: _Handle) -> dict:
    engine = handle.engine
    st = engine.state
    return {
        "campaign_id": campaign_id,
        "simulator_id": engine.simulator.id,
        "iteration": st.iteration,
        "simulator_calls_used": st.simulator_calls_used,
        "training_size": len(st.training_set),
        "stop_reason": st.stop_reason,
        "has_model": st.model is not None,
        "metrics_history": [
            {"iteration": i, "metrics": m.to_dict(engine.domain.output_names)}
            for i, m in st.metrics_history
        ],
    }


def create_app(
    registry: dict[str, Simulator] | None = None, data_dir: str | Path | None = None
) -> FastAPI:
    registry = registry if registry is not None else builtin_simulators()
    data_dir = Path(data_dir or os.environ.get("PROXSIM_DATA_DIR", DEFAULT_DATA_DIR))
    data_dir.mkdir(parents=True, exist_ok=True)

    app = FastAPI(title="proxsim", version="0.1.0")
    campaigns: dict[str, _Handle] = {}
    campaigns_guard = threading.Lock()

    @app.exception_handler(ApiFault)
    def _fault_handler(request: Request, exc: ApiFault):
        body = {"code": exc.code, "message": exc.message}
        if exc.details is not None:
            body["details"] = exc.details
        return JSONResponse(status_code=exc.status, content=body)

    @app.exception_handler(RequestValidationError)
    def _validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"code": "invalid_request", "message": "malformed request body",
                     "details": {"errors": exc.errors()}},
        )

    def _journal_path(campaign_id: str) -> Path:
        return data_dir / f"{campaign_id}.jsonl"

    def _get_handle(campaign_id: str) -> _Handle:
        with campaigns_guard:
            handle = campaigns.get(campaign_id)
            if handle is not None:
                return handle
            path = _journal_path(campaign_id)
            if not path.exists():
                raise ApiFault(404, "not_found", f"no campaign {campaign_id}")
            try:
                from .journal import read_journal

                sim_id = read_journal(path)[0].get("simulator_id")
                sim = registry.get(sim_id)
                if sim is None:
                    raise ApiFault(404, "unknown_simulator",
                                   f"journaled simulator {sim_id!r} is not registered")
                handle = _Handle(engine=load_campaign(path, sim))
            except CorruptJournal as exc:
                raise ApiFault(500, "corrupt_journal", str(exc))
            campaigns[campaign_id] = handle
            return handle

    # -- simulators ---------------------------------------------------------

    @app.get("/api/v1/simulators")
    def list_simulators():
        return [_simulator_info(registry[k]) for k in sorted(registry)]

    @app.get("/api/v1/simulators/{simulator_id}")
    def get_simulator(simulator_id: str):
        sim = registry.get(simulator_id)
        if sim is None:
            raise ApiFault(404, "unknown_simulator", f"no simulator {simulator_id!r}")
        return _simulator_info(sim)

    # -- campaigns ------------------------------------------------------------

    @app.get("/api/v1/campaigns")
    def list_campaigns():
        with campaigns_guard:
            known = set(campaigns)
        known |= {p.stem for p in data_dir.glob("*.jsonl")}
        out = []
        for cid in sorted(known):
            try:
                handle = _get_handle(cid)
            except ApiFault:
                continue  # skip unloadable journals in the listing
            out.append(_summary(cid, handle))
        return out

    @app.post("/api/v1/campaigns", status_code=201)
    def create_campaign(body: dict):
        sim_id = body.get("simulator_id")
        sim = registry.get(sim_id)
        if sim is None:
            raise ApiFault(404, "unknown_simulator", f"no simulator {sim_id!r}")
        try:
            config = CampaignConfig.from_dict(body.get("config") or {})
        except InvalidConfig as exc:
            raise ApiFault(422, "invalid_config", str(exc), {"field": exc.field})
        campaign_id = uuid.uuid4().hex
        engine = Campaign(sim, None, config, _journal_path(campaign_id))
        with campaigns_guard:
            campaigns[campaign_id] = _Handle(engine=engine)
        return {"campaign_id": campaign_id}

    @app.get("/api/v1/campaigns/{campaign_id}")
    def get_campaign(campaign_id: str):
        return _summary(campaign_id, _get_handle(campaign_id))

    @app.post("/api/v1/campaigns/{campaign_id}/advance")
    def advance(campaign_id: str, body: dict | None = None):
        iterations = (body or {}).get("iterations", 1)
        if not isinstance(iterations, int) or iterations < 0:
            raise ApiFault(422, "invalid_request", "iterations must be a non-negative integer")
        handle = _get_handle(campaign_id)
        if not handle.lock.acquire(blocking=False):
            raise ApiFault(409, "campaign_busy", "another advance is in flight")
        try:
            if handle.engine.state.stop_reason is not None:
                raise ApiFault(410, "campaign_stopped",
                               f"campaign stopped: {handle.engine.state.stop_reason}")
            handle.engine.advance(iterations)
        finally:
            handle.lock.release()
        return _summary(campaign_id, handle)

    def _predict_on(handle: _Handle, points: list[RawPoint]):
        engine = handle.engine
        if engine.state.model is None:
            raise ApiFault(409, "no_model_yet", "campaign has not fitted a model yet")
        rows = []
        for i, point in enumerate(points):
            if not isinstance(point, dict):
                raise ApiFault(422, "invalid_request", f"point {i} is not an object")
            try:
                rows.append(engine.domain.encode(point))
            except (OutOfDomain, UnknownLevel, UnknownVariable) as exc:
                raise ApiFault(
                    422,
                    "out_of_domain",
                    f"point {i}: {exc}",
                    {"index": i, "variable": getattr(exc, "variable", None)},
                )
        if not rows:
            m = engine.state.model.n_outputs
            return [], []
        mean, var = engine.state.model.predict_arrays(np.stack(rows))
        return mean.tolist(), var.tolist()

    @app.post("/api/v1/campaigns/{campaign_id}/predict")
    def predict(campaign_id: str, body: dict):
        points = body.get("points")
        if not isinstance(points, list):
            raise ApiFault(422, "invalid_request", "body must carry a list under 'points'")
        handle = _get_handle(campaign_id)
        mean, var = _predict_on(handle, points)
        return {"mean": mean, "variance": var}

    @app.post("/api/v1/campaigns/{campaign_id}/sweep")
    def sweep(campaign_id: str, body: dict):
        handle = _get_handle(campaign_id)
        domain = handle.engine.domain
        vary = body.get("vary")
        fixed = body.get("fixed") or {}
        steps = body.get("steps", 25)
        if vary not in domain.input_names:
            raise ApiFault(422, "bad_sweep", f"vary must be one of {list(domain.input_names)}")
        if vary in fixed:
            raise ApiFault(422, "bad_sweep", f"varied variable {vary!r} must not be fixed")
        missing = set(domain.input_names) - {vary} - set(fixed)
        if missing:
            raise ApiFault(422, "bad_sweep", f"fixed values missing for {sorted(missing)}")
        extra = set(fixed) - set(domain.input_names)
        if extra:
            raise ApiFault(422, "bad_sweep", f"unknown fixed variable(s) {sorted(extra)}")
        spec = domain.input_spec(vary)
        if spec.kind == "categorical":
            grid: list = list(spec.levels)
        else:
            if not isinstance(steps, int) or steps < 2:
                raise ApiFault(422, "bad_sweep", "steps must be an integer >= 2")
            values = np.linspace(spec.lower, spec.upper, steps)
            if spec.kind == "integer":
                values = np.rint(values)
            grid = [float(v) for v in values]
        points = [{**fixed, vary: g} for g in grid]
        mean, var = _predict_on(handle, points)
        return {"grid": grid, "mean": mean, "variance": var}

    return app


def main(bind: str | None = None) -> None:  # pragma: no cover
    import uvicorn

    bind = bind or os.environ.get("PROXSIM_BIND", "127.0.0.1:8000")
    host, _, port = bind.rpartition(":")
    uvicorn.run(create_app(), host=host or "127.0.0.1", port=int(port))

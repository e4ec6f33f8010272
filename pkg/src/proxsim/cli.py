"""Command-line front door: campaigns, predictions, sweeps, ingestion, serving.

Exit codes: 0 success, 2 configuration/usage errors, 3 unrecovered runtime
failures. Campaign configs are TOML or JSON files of the form
{"simulator": "...", "campaign": {...}} and share validation with the API.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from .campaign import CampaignConfig, run_campaign
from .errors import InvalidConfig, ProxsimError, SimulatorFailure
from .ingest import ingest_logs, load_log_schema
from .journal import read_journal
from .serialize import load_model, save_model
from .simulators import builtin_simulators


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config_file(path: Path) -> dict:
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib  # python >= 3.11
        except ImportError:
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


def _resolve_simulator(sim_field):
    """Simulator selection from a config document.

    Either a builtin id ("atm_slot_overload"), an object selecting a builtin
    with options ({"id": ..., "noise_sigma": ...}), or an external process
    speaking the CSV-over-stdio protocol
    ({"command": [...], "domain": {...}, "id"?, "deterministic"?}).
    """
    if isinstance(sim_field, str):
        sim_id, options = sim_field, {}
    elif isinstance(sim_field, dict):
        if "command" in sim_field:
            from .domain import DomainOfApplicability
            from .simulators import SubprocessSimulator

            if "domain" not in sim_field:
                raise ValueError("simulator: an external command needs a 'domain'")
            try:
                domain = DomainOfApplicability.from_dict(sim_field["domain"])
            except (KeyError, ValueError) as exc:
                raise ValueError(f"simulator.domain: {exc}")
            return SubprocessSimulator(
                sim_field.get("id", "external"),
                domain,
                [str(a) for a in sim_field["command"]],
                deterministic=bool(sim_field.get("deterministic", True)),
            )
        sim_id = sim_field.get("id")
        options = {k: v for k, v in sim_field.items() if k != "id"}
    else:
        raise ValueError("simulator: must be a simulator id or an object with an 'id' or 'command'")
    try:
        registry = builtin_simulators(**options)
    except TypeError as exc:
        raise ValueError(f"simulator: {exc}")
    sim = registry.get(sim_id)
    if sim is None:
        raise ValueError(f"simulator: unknown id {sim_id!r} (have {sorted(registry)})")
    return sim


@click.group()
@click.option("--seed", type=int, default=None, help="Override the campaign seed.")
@click.option("--data-dir", type=click.Path(), default=None, help="Journal root for serve.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              help="Output format for query commands.")
@click.pass_context
def main(ctx, seed, data_dir, fmt):
    """Surrogate-metamodel toolkit: train, query and serve simulator proxies."""
    ctx.obj = {"seed": seed, "data_dir": data_dir, "format": fmt}


@main.command()
@click.argument("config_path", type=click.Path(exists=True, path_type=Path))
@click.option("-o", "--out-dir", type=click.Path(path_type=Path), required=True)
@click.pass_context
def run(ctx, config_path, out_dir):
    """Run a campaign from a config file; write journal, model and metrics."""
    try:
        doc = _load_config_file(config_path)
    except Exception as exc:
        _fail(2, f"cannot parse {config_path}: {exc}")
    try:
        sim = _resolve_simulator(doc.get("simulator"))
    except ValueError as exc:
        _fail(2, str(exc))
    campaign_doc = dict(doc.get("campaign") or {})
    if ctx.obj["seed"] is not None:
        campaign_doc["seed"] = ctx.obj["seed"]
    try:
        config = CampaignConfig.from_dict(campaign_doc)
    except InvalidConfig as exc:
        _fail(2, str(exc))

    out_dir.mkdir(parents=True, exist_ok=True)
    journal_path = out_dir / "journal.jsonl"
    try:
        state = run_campaign(sim, None, config, journal_path=journal_path)
    except SimulatorFailure as exc:
        _fail(3, f"simulator failure: {exc}")
    except ProxsimError as exc:
        _fail(3, str(exc))
    save_model(state.model, out_dir / "model.json")
    _write_metrics_csv(journal_path, out_dir / "metrics.csv", sim.domain.output_names)
    click.echo(f"stopped: {state.stop_reason} after {state.iteration} iterations, "
               f"{state.simulator_calls_used} simulator calls")


def _write_metrics_csv(journal_path: Path, out_path: Path, output_names) -> None:
    header = ["iteration", "simulator_calls"]
    for name in output_names:
        header += [f"{name}_rmse", f"{name}_mae", f"{name}_r2", f"{name}_picp95"]
    calls = 0
    rows = []
    for rec in read_journal(journal_path):
        if rec["event"] == "simulate":
            calls += 1
        elif rec["event"] == "metrics":
            row = [rec["iteration"], calls]
            for name in output_names:
                m = rec["metrics"][name]
                row += [m["rmse"], m["mae"], m["r2"], m["picp95"]]
            rows.append(row)
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _read_points_csv(path: Path, domain):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [n for n in domain.input_names if n not in header]
        if missing:
            _fail(2, f"points file is missing column(s) {missing}")
        points = []
        for row in reader:
            point = {}
            for v in domain.inputs:
                raw = row[v.name]
                point[v.name] = raw if v.kind == "categorical" else float(raw)
            points.append(point)
    return points


@main.command()
@click.argument("model_path", type=click.Path(exists=True, path_type=Path))
@click.argument("points_csv", type=click.Path(exists=True, path_type=Path))
@click.argument("out_csv", type=click.Path(path_type=Path))
def predict(model_path, points_csv, out_csv):
    """Predict a CSV of raw points; columns must match the domain inputs."""
    model = load_model(model_path)
    domain = model.domain
    points = _read_points_csv(points_csv, domain)
    header = list(domain.input_names)
    for name in domain.output_names:
        header += [f"mean_{name}", f"var_{name}"]
    with open(out_csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        if points:
            try:
                X = domain.encode_batch(points)
            except ProxsimError as exc:
                _fail(2, str(exc))
            mean, var = model.predict_arrays(X)
            for i, p in enumerate(points):
                row = [p[n] for n in domain.input_names]
                for j in range(len(domain.output_names)):
                    row += [mean[i, j], var[i, j]]
                w.writerow(row)
    click.echo(f"wrote {len(points)} prediction(s) to {out_csv}")


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--vary", required=True, help="Input variable to sweep.")
@click.option("--steps", type=int, default=25, show_default=True)
@click.option("--fixed", "fixed_kv", multiple=True, metavar="NAME=VALUE",
              help="Fixed value for every other input; repeatable.")
@click.option("-o", "--out", "out_path", type=click.Path(path_type=Path), default=None)
@click.pass_context
def sweep(ctx, model_path, vary, steps, fixed_kv, out_path):
    """Sweep one input across its range, holding the others fixed."""
    model = load_model(model_path)
    domain = model.domain
    if vary not in domain.input_names:
        _fail(2, f"vary: {vary!r} is not an input (have {list(domain.input_names)})")
    fixed = {}
    for kv in fixed_kv:
        name, _, value = kv.partition("=")
        if not _:
            _fail(2, f"--fixed expects NAME=VALUE, got {kv!r}")
        if name not in domain.input_names:
            _fail(2, f"--fixed: unknown input {name!r}")
        spec = domain.input_spec(name)
        fixed[name] = value if spec.kind == "categorical" else float(value)
    missing = set(domain.input_names) - {vary} - set(fixed)
    if missing:
        _fail(2, f"missing --fixed for {sorted(missing)}")
    if vary in fixed:
        _fail(2, f"varied variable {vary!r} must not be fixed")
    spec = domain.input_spec(vary)
    if spec.kind == "categorical":
        grid = list(spec.levels)
    else:
        if steps < 2:
            _fail(2, "steps must be >= 2")
        values = np.linspace(spec.lower, spec.upper, steps)
        if spec.kind == "integer":
            values = np.rint(values)
        grid = [float(v) for v in values]
    points = [{**fixed, vary: g} for g in grid]
    try:
        X = domain.encode_batch(points)
    except ProxsimError as exc:
        _fail(2, str(exc))
    mean, var = model.predict_arrays(X)

    if ctx.obj["format"] == "json":
        doc = {"grid": grid, "mean": mean.tolist(), "variance": var.tolist()}
        text = json.dumps(doc, indent=1)
        if out_path:
            Path(out_path).write_text(text)
        else:
            click.echo(text)
    else:
        import io

        buf = io.StringIO()
        w = csv.writer(buf)
        header = [vary]
        for name in domain.output_names:
            header += [f"mean_{name}", f"var_{name}"]
        w.writerow(header)
        for i, g in enumerate(grid):
            row = [g]
            for j in range(len(domain.output_names)):
                row += [mean[i, j], var[i, j]]
            w.writerow(row)
        if out_path:
            Path(out_path).write_text(buf.getvalue())
        else:
            click.echo(buf.getvalue(), nl=False)


@main.command()
@click.argument("schema_path", type=click.Path(exists=True, path_type=Path))
@click.argument("out_path", type=click.Path(path_type=Path))
def ingest(schema_path, out_path):
    """Join simulator log files per a schema into a training-set JSON file."""
    try:
        schema, domain = load_log_schema(schema_path)
    except Exception as exc:
        _fail(2, f"cannot parse schema {schema_path}: {exc}")
    try:
        ts, report = ingest_logs(schema, domain, base_dir=schema_path.parent)
    except ProxsimError as exc:
        _fail(2, str(exc))
    Path(out_path).write_text(json.dumps(ts.to_dict(), indent=1))
    click.echo(json.dumps(report.to_dict(), indent=1))


@main.command("list-simulators")
@click.pass_context
def list_simulators(ctx):
    """Print the built-in simulator registry."""
    registry = builtin_simulators()
    infos = [
        {
            "id": registry[k].id,
            "deterministic": registry[k].deterministic,
            "cost_hint": registry[k].cost_hint,
            "inputs": list(registry[k].domain.input_names),
            "outputs": list(registry[k].domain.output_names),
        }
        for k in sorted(registry)
    ]
    if ctx.obj["format"] == "json":
        click.echo(json.dumps(infos, indent=1))
    else:
        w = csv.writer(sys.stdout)
        w.writerow(["id", "deterministic", "cost_hint", "inputs", "outputs"])
        for info in infos:
            w.writerow([info["id"], info["deterministic"], info["cost_hint"],
                        " ".join(info["inputs"]), " ".join(info["outputs"])])


@main.command()
@click.option("--bind", default=None, help="host:port (default PROXSIM_BIND or 127.0.0.1:8000)")
@click.pass_context
def serve(ctx, bind):
    """Serve the HTTP API."""
    import os

    import uvicorn

    from .api import create_app

    bind = bind or os.environ.get("PROXSIM_BIND", "127.0.0.1:8000")
    host, _, port = bind.rpartition(":")
    app = create_app(data_dir=ctx.obj["data_dir"])
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))


if __name__ == "__main__":
    main()

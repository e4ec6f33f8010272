"""Black-box simulator contract, desk-scale built-ins, and composition.

A simulator batch-maps raw input points to KPI output vectors, order- and
length-preserving. Two simulators compose serially (outputs wired into
inputs) or in parallel (shared inputs, combined outputs); either composite
is itself a simulator and can be metamodelled like any other.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import subprocess
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .domain import DomainOfApplicability, RawPoint, VariableSpec
from .errors import (
    CombinerError,
    IncompatibleWiring,
    RangeViolation,
    SharedVariableMismatch,
    SimulatorFailure,
)

logger = logging.getLogger(__name__)


class Simulator:
    """Contract: evaluate a batch of raw points into KPI vectors.

    Implementations must preserve order and length. Deterministic simulators
    return identical outputs for identical inputs; stochastic ones derive
    their randomness from the ``seed`` argument plus the point index so that
    campaigns stay reproducible.
    """

    id: str
    domain: DomainOfApplicability
    deterministic: bool = True
    cost_hint: float = 0.0

    def evaluate(self, points: Sequence[RawPoint], *, seed: int | None = None) -> np.ndarray:
        raise NotImplementedError


def simulate(sim: Simulator, points: Sequence[RawPoint], *, seed: int | None = None) -> np.ndarray:
    """Validate points against the simulator domain, then evaluate."""
    for p in points:
        sim.domain.encode(p)  # raises OutOfDomain / UnknownVariable / UnknownLevel
    out = sim.evaluate(points, seed=seed)
    out = np.atleast_2d(np.asarray(out, dtype=float))
    if out.shape != (len(points), len(sim.domain.outputs)):
        raise SimulatorFailure(None, f"{sim.id} returned shape {out.shape}, expected "
                                     f"({len(points)}, {len(sim.domain.outputs)})")
    return out


class FunctionSimulator(Simulator):
    """Wrap a per-point python function as a simulator.

    ``fn(point) -> dict`` for deterministic surfaces, or
    ``fn(point, rng) -> dict`` when ``stochastic=True``.
    """

    def __init__(self, id: str, domain: DomainOfApplicability, fn: Callable,
                 *, stochastic: bool = False, cost_hint: float = 0.0):
        self.id = id
        self.domain = domain
        self._fn = fn
        self.deterministic = not stochastic
        self.cost_hint = cost_hint

    def evaluate(self, points, *, seed=None):
        out = np.empty((len(points), len(self.domain.outputs)))
        names = self.domain.output_names
        for i, p in enumerate(points):
            if self.deterministic:
                res = self._fn(p)
            else:
                rng = np.random.default_rng(None if seed is None else [seed, i])
                res = self._fn(p, rng)
            out[i] = [res[n] for n in names]
        return out


# --- built-ins ----------------------------------------------------------------


def atm_slot_overload(noise_sigma: float = 0.0) -> Simulator:
    """Toy runway slot-overload surface: delay grows quadratically once
    demand exceeds capacity; throughput saturates at capacity.

    Optional additive Gaussian noise (std ``noise_sigma`` minutes) on the
    delay KPI makes the simulator stochastic but seed-reproducible.
    """
    domain = DomainOfApplicability(
        inputs=(
            VariableSpec("demand", "continuous", 10.0, 100.0, unit="flights/h"),
            VariableSpec("capacity", "continuous", 20.0, 60.0, unit="movements/h"),
        ),
        outputs=(
            VariableSpec("avg_delay", "continuous", -10.0, 110.0, unit="min"),
            VariableSpec("throughput", "continuous", 10.0, 60.0, unit="movements/h"),
        ),
    )

    if noise_sigma == 0.0:

        def fn(p):
            d, c = float(p["demand"]), float(p["capacity"])
            delay = 60.0 * max(0.0, d - c) ** 2 / (2.0 * c * d)
            return {"avg_delay": delay, "throughput": min(d, c)}

        return FunctionSimulator("atm_slot_overload", domain, fn, cost_hint=0.001)

    def noisy_fn(p, rng):
        d, c = float(p["demand"]), float(p["capacity"])
        delay = 60.0 * max(0.0, d - c) ** 2 / (2.0 * c * d) + rng.normal(0.0, noise_sigma)
        return {"avg_delay": delay, "throughput": min(d, c)}

    return FunctionSimulator(
        "atm_slot_overload_noisy", domain, noisy_fn, stochastic=True, cost_hint=0.001
    )


def branin() -> Simulator:
    """Branin-Hoo test surface with the standard constants."""
    domain = DomainOfApplicability(
        inputs=(
            VariableSpec("x1", "continuous", -5.0, 10.0),
            VariableSpec("x2", "continuous", 0.0, 15.0),
        ),
        outputs=(VariableSpec("value", "continuous", 0.0, 320.0),),
    )
    a = 1.0
    b = 5.1 / (4.0 * math.pi**2)
    c = 5.0 / math.pi
    r = 6.0
    s = 10.0
    t = 1.0 / (8.0 * math.pi)

    def fn(p):
        x1, x2 = float(p["x1"]), float(p["x2"])
        return {"value": a * (x2 - b * x1**2 + c * x1 - r) ** 2 + s * (1 - t) * math.cos(x1) + s}

    return FunctionSimulator("branin", domain, fn, cost_hint=0.001)


# --- serial composition ---------------------------------------------------------


@dataclass(frozen=True)
class Wire:
    upstream_output: str
    downstream_input: str
    clamp: bool = False


@dataclass(frozen=True)
class WiringSpec:
    """Output-to-input wiring for serial composition.

    Every downstream input must be either wired or exposed, never both.
    Without ``clamp``, a wired upstream output whose declared range exceeds
    the downstream input bounds is rejected at composition time, and any
    runtime excursion raises RangeViolation; with ``clamp`` the value is
    clipped and the clamp logged.
    """

    wires: tuple[Wire, ...]
    expose: tuple[str, ...] = ()
    reexport_outputs: tuple[str, ...] = ()


class _SerialSimulator(Simulator):
    def __init__(self, a: Simulator, b: Simulator, wiring: WiringSpec):
        upstream_outputs = {v.name: v for v in a.domain.outputs}
        downstream_inputs = {v.name: v for v in b.domain.inputs}

        wired_targets = [w.downstream_input for w in wiring.wires]
        if len(set(wired_targets)) != len(wired_targets):
            raise IncompatibleWiring("a downstream input is wired more than once")
        for w in wiring.wires:
            if w.upstream_output not in upstream_outputs:
                raise IncompatibleWiring(f"unknown upstream output {w.upstream_output!r}")
            if w.downstream_input not in downstream_inputs:
                raise IncompatibleWiring(f"unknown downstream input {w.downstream_input!r}")
        overlap = set(wired_targets) & set(wiring.expose)
        if overlap:
            raise IncompatibleWiring(f"inputs both wired and exposed: {sorted(overlap)}")
        uncovered = set(downstream_inputs) - set(wired_targets) - set(wiring.expose)
        if uncovered:
            raise IncompatibleWiring(f"downstream inputs neither wired nor exposed: {sorted(uncovered)}")
        for name in wiring.expose:
            if name not in downstream_inputs:
                raise IncompatibleWiring(f"unknown exposed input {name!r}")
        for name in wiring.reexport_outputs:
            if name not in upstream_outputs:
                raise IncompatibleWiring(f"unknown re-exported output {name!r}")

        # declared-range containment unless a clamp is declared
        for w in wiring.wires:
            src = upstream_outputs[w.upstream_output]
            dst = downstream_inputs[w.downstream_input]
            if dst.kind == "categorical":
                raise IncompatibleWiring(f"cannot wire a KPI into categorical input {dst.name!r}")
            if not w.clamp and (src.lower < dst.lower or src.upper > dst.upper):
                raise IncompatibleWiring(
                    f"range of {src.name!r} [{src.lower}, {src.upper}] exceeds input "
                    f"{dst.name!r} [{dst.lower}, {dst.upper}]; declare clamp=True to clip"
                )

        inputs = list(a.domain.inputs) + [downstream_inputs[n] for n in wiring.expose]
        names = [v.name for v in inputs]
        if len(set(names)) != len(names):
            raise IncompatibleWiring("composite input names collide; rename or share explicitly")
        outputs = list(b.domain.outputs) + [upstream_outputs[n] for n in wiring.reexport_outputs]
        out_names = [v.name for v in outputs]
        if len(set(out_names)) != len(out_names):
            raise IncompatibleWiring("composite output names collide")

        self.id = f"{a.id}>>{b.id}"
        self.domain = DomainOfApplicability(inputs=tuple(inputs), outputs=tuple(outputs))
        self.deterministic = a.deterministic and b.deterministic
        self.cost_hint = a.cost_hint + b.cost_hint
        self._a = a
        self._b = b
        self._wiring = wiring

    def evaluate(self, points, *, seed=None):
        a_names = self._a.domain.input_names
        a_points = [{k: p[k] for k in a_names} for p in points]
        a_out = self._a.evaluate(a_points, seed=None if seed is None else [seed, 0])
        a_out = np.atleast_2d(np.asarray(a_out, dtype=float))
        a_index = {n: j for j, n in enumerate(self._a.domain.output_names)}

        b_points = []
        for i, p in enumerate(points):
            bp = {n: p[n] for n in self._wiring.expose}
            for w in self._wiring.wires:
                value = float(a_out[i, a_index[w.upstream_output]])
                spec = self._b.domain.input_spec(w.downstream_input)
                if value < spec.lower or value > spec.upper:
                    if not w.clamp:
                        raise RangeViolation(w.downstream_input, value)
                    clipped = min(max(value, spec.lower), spec.upper)
                    logger.warning(
                        "clamped %s: %g -> %g on %s", w.downstream_input, value, clipped, self.id
                    )
                    value = clipped
                bp[w.downstream_input] = value
            b_points.append(bp)
        b_out = self._b.evaluate(b_points, seed=None if seed is None else [seed, 1])
        b_out = np.atleast_2d(np.asarray(b_out, dtype=float))

        if not self._wiring.reexport_outputs:
            return b_out
        extra = a_out[:, [a_index[n] for n in self._wiring.reexport_outputs]]
        return np.hstack([b_out, extra])


def compose_serial(a: Simulator, b: Simulator, wiring: WiringSpec) -> Simulator:
    """Feed ``a``'s outputs into ``b``'s inputs; the result is a simulator
    whose inputs are a's inputs plus b's exposed inputs and whose outputs
    are b's outputs (plus any re-exported a outputs)."""
    return _SerialSimulator(a, b, wiring)


# --- parallel composition -------------------------------------------------------


_REDUCTIONS = ("sum", "mean", "min", "max", "weighted_sum", "pass")


@dataclass(frozen=True)
class CombinedOutput:
    """One composite KPI: a reduction over named outputs of the two sides.

    Terms are ("a"|"b", output_name) pairs; ``pass`` takes exactly one term.
    """

    name: str
    reduction: str
    terms: tuple[tuple[str, str], ...]
    weights: tuple[float, ...] | None = None


@dataclass(frozen=True)
class CombinerSpec:
    outputs: tuple[CombinedOutput, ...]


def _term_bounds(spec_for):
    def bounds(co: CombinedOutput):
        los = [spec_for(side, name).lower for side, name in co.terms]
        ups = [spec_for(side, name).upper for side, name in co.terms]
        if co.reduction == "pass":
            return los[0], ups[0]
        if co.reduction == "sum":
            return sum(los), sum(ups)
        if co.reduction == "mean":
            return sum(los) / len(los), sum(ups) / len(ups)
        if co.reduction == "min":
            return min(los), min(ups)
        if co.reduction == "max":
            return max(los), max(ups)
        lo = sum(w * (l if w >= 0 else u) for w, l, u in zip(co.weights, los, ups))
        up = sum(w * (u if w >= 0 else l) for w, l, u in zip(co.weights, los, ups))
        return lo, up

    return bounds


class _ParallelSimulator(Simulator):
    def __init__(self, a: Simulator, b: Simulator, shared: Sequence[str], combiner: CombinerSpec):
        a_in = {v.name: v for v in a.domain.inputs}
        b_in = {v.name: v for v in b.domain.inputs}
        for name in shared:
            if name not in a_in or name not in b_in:
                raise SharedVariableMismatch(f"shared variable {name!r} missing on one side")
            if a_in[name] != b_in[name]:
                raise SharedVariableMismatch(
                    f"shared variable {name!r} differs in kind/bounds/levels between sides"
                )
        a_only = [v for v in a.domain.inputs if v.name not in shared]
        b_only = [v for v in b.domain.inputs if v.name not in shared]
        collision = {v.name for v in a_only} & {v.name for v in b_only}
        if collision:
            raise SharedVariableMismatch(
                f"inputs {sorted(collision)} exist on both sides but are not declared shared"
            )

        sides = {"a": {v.name: v for v in a.domain.outputs}, "b": {v.name: v for v in b.domain.outputs}}

        def spec_for(side, name):
            if side not in sides or name not in sides[side]:
                raise CombinerError(f"unknown output {side}.{name}")
            return sides[side][name]

        if not combiner.outputs:
            raise CombinerError("combiner must define at least one output")
        bounds = _term_bounds(spec_for)
        out_specs = []
        for co in combiner.outputs:
            if co.reduction not in _REDUCTIONS:
                raise CombinerError(f"unknown reduction {co.reduction!r}")
            if co.reduction == "pass" and len(co.terms) != 1:
                raise CombinerError("pass-through takes exactly one term")
            if co.reduction == "weighted_sum":
                if co.weights is None or len(co.weights) != len(co.terms):
                    raise CombinerError("weighted_sum needs one finite weight per term")
                if not all(math.isfinite(w) for w in co.weights):
                    raise CombinerError("weights must be finite")
            if not co.terms:
                raise CombinerError(f"output {co.name!r} has no terms")
            lo, up = bounds(co)
            unit = spec_for(*co.terms[0]).unit if co.reduction == "pass" else ""
            out_specs.append(VariableSpec(co.name, "continuous", lo, up, unit=unit))

        shared_specs = [a_in[n] for n in shared]
        self.id = f"{a.id}||{b.id}"
        self.domain = DomainOfApplicability(
            inputs=tuple(shared_specs + a_only + b_only), outputs=tuple(out_specs)
        )
        self.deterministic = a.deterministic and b.deterministic
        self.cost_hint = max(a.cost_hint, b.cost_hint)
        self._a = a
        self._b = b
        self._combiner = combiner

    def evaluate(self, points, *, seed=None):
        a_names = self._a.domain.input_names
        b_names = self._b.domain.input_names
        a_out = self._a.evaluate(
            [{k: p[k] for k in a_names} for p in points], seed=None if seed is None else [seed, 0]
        )
        b_out = self._b.evaluate(
            [{k: p[k] for k in b_names} for p in points], seed=None if seed is None else [seed, 1]
        )
        a_out = np.atleast_2d(np.asarray(a_out, dtype=float))
        b_out = np.atleast_2d(np.asarray(b_out, dtype=float))
        cols = {
            "a": {n: a_out[:, j] for j, n in enumerate(self._a.domain.output_names)},
            "b": {n: b_out[:, j] for j, n in enumerate(self._b.domain.output_names)},
        }
        out = np.empty((len(points), len(self._combiner.outputs)))
        for k, co in enumerate(self._combiner.outputs):
            terms = np.stack([cols[side][name] for side, name in co.terms])
            if co.reduction == "pass":
                out[:, k] = terms[0]
            elif co.reduction == "sum":
                out[:, k] = terms.sum(axis=0)
            elif co.reduction == "mean":
                out[:, k] = terms.mean(axis=0)
            elif co.reduction == "min":
                out[:, k] = terms.min(axis=0)
            elif co.reduction == "max":
                out[:, k] = terms.max(axis=0)
            else:
                out[:, k] = np.tensordot(np.asarray(co.weights), terms, axes=1)
        return out


def compose_parallel(
    a: Simulator, b: Simulator, shared: Sequence[str], combiner: CombinerSpec
) -> Simulator:
    """Run ``a`` and ``b`` on their projections of a joint input space and
    combine their outputs per the combiner spec."""
    return _ParallelSimulator(a, b, shared, combiner)


# --- subprocess adapter ---------------------------------------------------------


class SubprocessSimulator(Simulator):
    """Adapter for external executables speaking CSV on standard streams.

    Request: CSV header of input names plus one row per point on stdin.
    Response: CSV header of output names plus row-aligned values on stdout.
    A nonzero exit status raises SimulatorFailure. Process pooling, retries
    and timeouts are intentionally out of scope.
    """

    def __init__(self, id: str, domain: DomainOfApplicability, argv: Sequence[str],
                 *, deterministic: bool = True, cost_hint: float = 1.0):
        self.id = id
        self.domain = domain
        self.argv = tuple(argv)
        self.deterministic = deterministic
        self.cost_hint = cost_hint

    def evaluate(self, points, *, seed=None):
        names = self.domain.input_names
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(names)
        for p in points:
            writer.writerow([p[n] for n in names])
        try:
            proc = subprocess.run(
                self.argv, input=buf.getvalue(), capture_output=True, text=True, check=False
            )
        except OSError as exc:
            raise SimulatorFailure(None, f"cannot launch {self.argv}: {exc}")
        if proc.returncode != 0:
            raise SimulatorFailure(None, f"{self.id} exited {proc.returncode}: {proc.stderr.strip()}")
        reader = csv.reader(io.StringIO(proc.stdout))
        rows = [r for r in reader if r]
        if not rows:
            raise SimulatorFailure(None, f"{self.id} produced no output")
        header = rows[0]
        expected = list(self.domain.output_names)
        if header != expected:
            raise SimulatorFailure(None, f"{self.id} output header {header} != {expected}")
        data = rows[1:]
        if len(data) != len(points):
            raise SimulatorFailure(None, f"{self.id} returned {len(data)} rows for {len(points)} points")
        try:
            return np.array([[float(v) for v in r] for r in data])
        except ValueError as exc:
            raise SimulatorFailure(None, f"{self.id} produced non-numeric output: {exc}")


def builtin_simulators(noise_sigma: float = 0.0) -> dict[str, Simulator]:
    """Registry of the built-in simulators, keyed by id."""
    sims = [atm_slot_overload(), branin()]
    if noise_sigma > 0:
        sims.append(atm_slot_overload(noise_sigma))
    return {s.id: s for s in sims}

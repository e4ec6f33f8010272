"""Variable spaces, the domain of applicability, and dataset types.

Raw points are plain ``{name: value}`` dicts. Encoding maps them onto flat
float vectors: continuous and integer variables are copied, categorical
variables expand to a one-hot block in declared level order. All models
additionally work on a scaled copy of the encoded space where numeric slots
are affinely mapped to [0, 1]; one-hot slots are left untouched. Scaling is
internal: files, the CLI and the API always speak raw values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateInput,
    MalformedOneHot,
    OutOfDomain,
    UnknownLevel,
    UnknownVariable,
)

RawValue = Union[float, int, str]
RawPoint = Mapping[str, RawValue]

KINDS = ("continuous", "integer", "categorical")


@dataclass(frozen=True)
class VariableSpec:
    """One typed, bounded input or output variable."""

    name: str
    kind: str
    lower: float | None = None
    upper: float | None = None
    levels: tuple[str, ...] | None = None
    unit: str = ""

    def __post_init__(self):
        if not self.name:
            raise ValueError("variable name must be non-empty")
        if self.kind not in KINDS:
            raise ValueError(f"{self.name}: kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "categorical":
            if not self.levels:
                raise ValueError(f"{self.name}: categorical variable needs at least one level")
            if len(set(self.levels)) != len(self.levels):
                raise ValueError(f"{self.name}: duplicate level labels")
            if self.lower is not None or self.upper is not None:
                raise ValueError(f"{self.name}: categorical variable cannot carry bounds")
            object.__setattr__(self, "levels", tuple(self.levels))
        else:
            if self.lower is None or self.upper is None:
                raise ValueError(f"{self.name}: numeric variable needs lower and upper bounds")
            if not (float(self.lower) < float(self.upper)):
                raise ValueError(f"{self.name}: lower must be strictly below upper")
            if self.levels is not None:
                raise ValueError(f"{self.name}: numeric variable cannot carry levels")
            object.__setattr__(self, "lower", float(self.lower))
            object.__setattr__(self, "upper", float(self.upper))

    @property
    def width(self) -> int:
        """Number of encoded slots this variable occupies."""
        return len(self.levels) if self.kind == "categorical" else 1

    def to_dict(self) -> dict:
        d: dict = {"name": self.name, "kind": self.kind}
        if self.kind == "categorical":
            d["levels"] = list(self.levels)
        else:
            d["lower"] = self.lower
            d["upper"] = self.upper
        if self.unit:
            d["unit"] = self.unit
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "VariableSpec":
        levels = d.get("levels")
        return cls(
            name=d["name"],
            kind=d["kind"],
            lower=d.get("lower"),
            upper=d.get("upper"),
            levels=tuple(levels) if levels is not None else None,
            unit=d.get("unit", ""),
        )


@dataclass(frozen=True)
class DomainOfApplicability:
    """Ordered input and output variable declarations.

    Outputs are continuous KPIs only. The encoded input dimension ``D``
    counts one slot per numeric input plus one per categorical level.
    """

    inputs: tuple[VariableSpec, ...]
    outputs: tuple[VariableSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if not self.inputs or not self.outputs:
            raise ValueError("domain needs at least one input and one output")
        names = [v.name for v in self.inputs] + [v.name for v in self.outputs]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique within a domain")
        for v in self.outputs:
            if v.kind != "continuous":
                raise ValueError(f"{v.name}: outputs must be continuous KPIs")
        offsets = []
        pos = 0
        for v in self.inputs:
            offsets.append(pos)
            pos += v.width
        object.__setattr__(self, "_offsets", tuple(offsets))
        object.__setattr__(self, "_dim", pos)
        # affine slot scaling: scaled = (x - shift) / span; one-hot slots identity
        shift = np.zeros(pos)
        span = np.ones(pos)
        integer_slots = []
        for v, off in zip(self.inputs, offsets):
            if v.kind in ("continuous", "integer"):
                shift[off] = v.lower
                span[off] = v.upper - v.lower
                if v.kind == "integer":
                    integer_slots.append(off)
        shift.flags.writeable = False
        span.flags.writeable = False
        object.__setattr__(self, "_shift", shift)
        object.__setattr__(self, "_span", span)
        object.__setattr__(self, "_integer_slots", tuple(integer_slots))

    @property
    def encoded_dim(self) -> int:
        return self._dim

    @property
    def output_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.outputs)

    @property
    def input_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.inputs)

    @property
    def integer_slots(self) -> tuple[int, ...]:
        return self._integer_slots

    def input_spec(self, name: str) -> VariableSpec:
        for v in self.inputs:
            if v.name == name:
                return v
        raise UnknownVariable(f"no input variable named {name!r}")

    # --- encoding ---------------------------------------------------------

    def encode(self, point: RawPoint) -> np.ndarray:
        """Encode a raw point into a length-D float vector.

        Raises UnknownVariable for missing or extra names, OutOfDomain for
        numeric values outside bounds, UnknownLevel for unknown categories.
        """
        extra = set(point) - set(self.input_names)
        if extra:
            raise UnknownVariable(f"unknown input variable(s): {sorted(extra)}")
        x = np.zeros(self._dim)
        for v, off in zip(self.inputs, self._offsets):
            if v.name not in point:
                raise UnknownVariable(f"missing input variable {v.name!r}")
            value = point[v.name]
            if v.kind == "categorical":
                if value not in v.levels:
                    raise UnknownLevel(v.name, value)
                x[off + v.levels.index(value)] = 1.0
            else:
                try:
                    value = float(value)
                except (TypeError, ValueError):
                    raise OutOfDomain(v.name, value, f"{v.name!r} expects a number, got {value!r}")
                if not (v.lower <= value <= v.upper):
                    raise OutOfDomain(v.name, value)
                x[off] = value
        return x

    def decode(self, x: np.ndarray) -> dict[str, RawValue]:
        """Exact inverse of :meth:`encode` on valid vectors."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self._dim,):
            raise DimensionMismatch(f"expected vector of length {self._dim}, got shape {x.shape}")
        point: dict[str, RawValue] = {}
        for v, off in zip(self.inputs, self._offsets):
            if v.kind == "categorical":
                block = x[off : off + v.width]
                hot = np.flatnonzero(block == 1.0)
                if len(hot) != 1 or block.sum() != 1.0 or not np.all((block == 0.0) | (block == 1.0)):
                    raise MalformedOneHot(f"{v.name}: one-hot block {block.tolist()} is malformed")
                point[v.name] = v.levels[hot[0]]
            else:
                point[v.name] = float(x[off])
        return point

    def encode_batch(self, points: Sequence[RawPoint]) -> np.ndarray:
        if len(points) == 0:
            return np.zeros((0, self._dim))
        return np.stack([self.encode(p) for p in points])

    def decode_batch(self, X: np.ndarray) -> list[dict[str, RawValue]]:
        return [self.decode(row) for row in np.atleast_2d(X)]

    # --- scaling ------------------------------------------------------------

    def scale(self, X: np.ndarray) -> np.ndarray:
        """Map encoded vectors into model space (numeric slots to [0, 1])."""
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self._dim:
            raise DimensionMismatch(f"expected {self._dim} encoded slots, got {X.shape[-1]}")
        return (X - self._shift) / self._span

    def unscale(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self._dim:
            raise DimensionMismatch(f"expected {self._dim} encoded slots, got {X.shape[-1]}")
        return X * self._span + self._shift

    def round_integer_slots(self, X: np.ndarray) -> np.ndarray:
        """Round integer-variable slots of raw-space encoded rows."""
        if not self._integer_slots:
            return X
        X = np.array(X, dtype=float)
        idx = list(self._integer_slots)
        X[..., idx] = np.rint(X[..., idx])
        return X

    # --- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "inputs": [v.to_dict() for v in self.inputs],
            "outputs": [v.to_dict() for v in self.outputs],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "DomainOfApplicability":
        return cls(
            inputs=tuple(VariableSpec.from_dict(v) for v in d["inputs"]),
            outputs=tuple(VariableSpec.from_dict(v) for v in d["outputs"]),
        )


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class TrainingSet:
    """Labelled rows: encoded inputs X (n, D) and KPI outputs Y (n, m).

    Immutable value; appending returns a new set. Duplicate input rows are a
    caller-level policy: reject them whenever the model noise variance is
    pinned to ~0, since they make the kernel matrix singular.
    """

    domain: DomainOfApplicability
    X: np.ndarray = field(default=None)
    Y: np.ndarray = field(default=None)

    def __post_init__(self):
        X = self.X if self.X is not None else np.zeros((0, self.domain.encoded_dim))
        Y = self.Y if self.Y is not None else np.zeros((0, len(self.domain.outputs)))
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if X.shape[0] != Y.shape[0]:
            raise DimensionMismatch(f"|X|={X.shape[0]} differs from |Y|={Y.shape[0]}")
        if X.shape[0] and X.shape[1] != self.domain.encoded_dim:
            raise DimensionMismatch(
                f"X has {X.shape[1]} slots, domain encodes {self.domain.encoded_dim}"
            )
        if Y.shape[0] and Y.shape[1] != len(self.domain.outputs):
            raise DimensionMismatch(
                f"Y has {Y.shape[1]} columns, domain declares {len(self.domain.outputs)} outputs"
            )
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "Y", _frozen(Y))

    def __len__(self) -> int:
        return self.X.shape[0]

    def has_duplicate_inputs(self) -> bool:
        if len(self) < 2:
            return False
        return len(np.unique(self.X, axis=0)) < len(self)

    def to_dict(self) -> dict:
        return {
            "domain": self.domain.to_dict(),
            "X": self.X.tolist(),
            "Y": self.Y.tolist(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TrainingSet":
        return cls(DomainOfApplicability.from_dict(d["domain"]), np.asarray(d["X"]), np.asarray(d["Y"]))


@dataclass(frozen=True)
class PredictionSet:
    """Unlabelled encoded inputs to explore by proxy."""

    domain: DomainOfApplicability
    X: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        if X.shape[0] and X.shape[1] != self.domain.encoded_dim:
            raise DimensionMismatch(
                f"X has {X.shape[1]} slots, domain encodes {self.domain.encoded_dim}"
            )
        object.__setattr__(self, "X", _frozen(X))

    def __len__(self) -> int:
        return self.X.shape[0]


def append_labeled(
    ts: TrainingSet,
    X: np.ndarray | Iterable,
    Y: np.ndarray | Iterable,
    *,
    allow_duplicates: bool = True,
) -> TrainingSet:
    """Return a new training set with rows appended in order.

    With ``allow_duplicates=False`` (the noise-free policy) a new row whose
    inputs duplicate an existing or batch-mate row raises DuplicateInput.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[0] != Y.shape[0]:
        raise DimensionMismatch(f"|X|={X.shape[0]} differs from |Y|={Y.shape[0]}")
    if X.shape[0] == 0:
        return ts
    if X.shape[1] != ts.domain.encoded_dim:
        raise DimensionMismatch(
            f"new rows have {X.shape[1]} slots, domain encodes {ts.domain.encoded_dim}"
        )
    if not allow_duplicates:
        combined = np.vstack([ts.X, X]) if len(ts) else X
        if len(np.unique(combined, axis=0)) < combined.shape[0]:
            raise DuplicateInput("appending would duplicate an input row under the noise-free policy")
    newX = np.vstack([ts.X, X]) if len(ts) else X
    newY = np.vstack([ts.Y, Y]) if len(ts) else Y
    return TrainingSet(ts.domain, newX, newY)

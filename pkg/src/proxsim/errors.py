"""Exception hierarchy shared by the library, the CLI and the HTTP service.

Every error carries a stable machine-readable ``code`` so the CLI and the
API report the same closed set of failure kinds.
"""

from __future__ import annotations


class ProxsimError(Exception):
    """Base class for all toolkit errors."""

    code = "error"


# --- domain / encoding ----------------------------------------------------

class UnknownVariable(ProxsimError):
    code = "unknown_variable"


class OutOfDomain(ProxsimError):
    code = "out_of_domain"

    def __init__(self, variable: str, value, message: str | None = None):
        self.variable = variable
        self.value = value
        super().__init__(message or f"value {value!r} of {variable!r} is outside the domain")


class UnknownLevel(ProxsimError):
    code = "unknown_level"

    def __init__(self, variable: str, label, message: str | None = None):
        self.variable = variable
        self.label = label
        super().__init__(message or f"label {label!r} is not a level of {variable!r}")


class MalformedOneHot(ProxsimError):
    code = "malformed_one_hot"


class DimensionMismatch(ProxsimError):
    code = "dimension_mismatch"


class DuplicateInput(ProxsimError):
    code = "duplicate_input"


# --- model fitting --------------------------------------------------------

class TooFewPoints(ProxsimError):
    code = "too_few_points"


class RankDeficient(ProxsimError):
    code = "rank_deficient"


class NotPositiveDefinite(ProxsimError):
    code = "not_positive_definite"


class EmptyHoldout(ProxsimError):
    code = "empty_holdout"


# --- acquisition / campaigns ----------------------------------------------

class EmptyPool(ProxsimError):
    code = "empty_pool"


class BatchTooLarge(ProxsimError):
    code = "batch_too_large"


class InvalidConfig(ProxsimError):
    code = "invalid_config"

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class CorruptJournal(ProxsimError):
    code = "corrupt_journal"


class DomainMismatch(ProxsimError):
    code = "domain_mismatch"


# --- simulators -----------------------------------------------------------

class SimulatorFailure(ProxsimError):
    code = "simulator_failure"

    def __init__(self, point, cause: str):
        self.point = point
        self.cause = cause
        super().__init__(f"simulator failed on {point!r}: {cause}")


class IncompatibleWiring(ProxsimError):
    code = "incompatible_wiring"


class RangeViolation(ProxsimError):
    code = "range_violation"

    def __init__(self, variable: str, value: float, message: str | None = None):
        self.variable = variable
        self.value = value
        super().__init__(message or f"wired value {value!r} violates bounds of {variable!r}")


class SharedVariableMismatch(ProxsimError):
    code = "shared_variable_mismatch"


class CombinerError(ProxsimError):
    code = "combiner_error"


# --- log ingestion ----------------------------------------------------------

class MissingFile(ProxsimError):
    code = "missing_file"


class MissingColumn(ProxsimError):
    code = "missing_column"


class KeyCollision(ProxsimError):
    code = "key_collision"


class UnmappableValue(ProxsimError):
    code = "unmappable_value"

    def __init__(self, row, column: str, message: str | None = None):
        self.row = row
        self.column = column
        super().__init__(message or f"row {row!r}, column {column!r}: value cannot be mapped")

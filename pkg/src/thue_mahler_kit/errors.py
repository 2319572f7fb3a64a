from __future__ import annotations

from typing import ClassVar


class ThueMahlerError(Exception):
    """Base class for domain errors; ``kind`` is the machine-readable tag."""

    kind: ClassVar[str] = "error"


class ReduciblePolynomialError(ThueMahlerError):
    kind = "reducible_polynomial"


class NonIntegralBasisError(ThueMahlerError):
    kind = "non_integral_basis"


class DivisionByZeroError(ThueMahlerError):
    kind = "division_by_zero"


class ZeroInputError(ThueMahlerError):
    kind = "zero_input"


class UnsupportedPrimeError(ThueMahlerError):
    kind = "unsupported_prime"


class MissingFieldDataError(ThueMahlerError):
    kind = "missing_field_data"


class DependentUnitsError(ThueMahlerError):
    kind = "dependent_units"


class NotInGeneratedGroupError(ThueMahlerError):
    kind = "not_in_generated_group"


class NotSUnitError(ThueMahlerError):
    kind = "not_s_unit"


class NotInOSError(ThueMahlerError):
    kind = "not_s_integer"


class CapExceededError(ThueMahlerError):
    kind = "cap_exceeded"

    def __init__(self: CapExceededError, message: str, *, required: str | None = None) -> None:
        super().__init__(message)
        self.required = required


class PrecisionExhaustedError(ThueMahlerError):
    kind = "precision_exhausted"


class BoundViolationError(ThueMahlerError):
    kind = "bound_violation"


class InvalidSolutionError(ThueMahlerError):
    kind = "invalid_solution"


class TrivialSolutionError(ThueMahlerError):
    kind = "trivial_solution"


class CardinalityError(ThueMahlerError):
    kind = "cardinality"


class NonIntegralFormError(ThueMahlerError):
    kind = "non_integral_form"


class MixedProblemsError(ThueMahlerError):
    kind = "mixed_problems"


class ConfigError(ThueMahlerError):
    kind = "config"


class UsageError(ThueMahlerError):
    kind = "usage"


class InternalConsistencyError(ThueMahlerError):
    kind = "internal_consistency"


def error_body(kind: str, message: str, request_id: str | None) -> dict[str, str | None]:
    return {"kind": kind, "message": message, "request_id": request_id}


def body_for(err: ThueMahlerError, request_id: str | None = None) -> dict[str, str | None]:
    return error_body(err.kind, str(err), request_id)

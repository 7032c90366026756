"""Pydantic models for qqlab reports.

Every experiment produces an ``ExperimentReport`` made of ``Assertion`` rows.
Tools and the CLI serialise these with ``model_dump(mode="json")``.
"""

from typing import Any, Literal

from pydantic import BaseModel, Field, computed_field

from .errors import QQLabError

# === Assertion rows ===


class Assertion(BaseModel):
    """One machine-checked inequality.

    ``slack`` already includes the numerical tolerance, so a row passes iff
    ``slack >= 0``.
    """

    name: str
    passed: bool
    measured: float
    bound: float
    slack: float
    sense: Literal["<=", ">=", "=="] = "<="

    @classmethod
    def at_most(cls, name: str, measured: float, bound: float, tol: float = 0.0) -> "Assertion":
        slack = float(bound) + tol - float(measured)
        return cls(
            name=name, passed=slack >= 0, measured=measured, bound=bound, slack=slack, sense="<="
        )

    @classmethod
    def at_least(cls, name: str, measured: float, bound: float, tol: float = 0.0) -> "Assertion":
        slack = float(measured) - (float(bound) - tol)
        return cls(
            name=name, passed=slack >= 0, measured=measured, bound=bound, slack=slack, sense=">="
        )

    @classmethod
    def close_to(cls, name: str, measured: float, target: float, tol: float) -> "Assertion":
        slack = tol - abs(float(measured) - float(target))
        return cls(
            name=name, passed=slack >= 0, measured=measured, bound=target, slack=slack, sense="=="
        )


def all_passed(assertions: list[Assertion]) -> bool:
    return all(a.passed for a in assertions)


# === Experiment reports ===


class ExperimentReport(BaseModel):
    """Machine-readable outcome of one CLI or MCP experiment."""

    command: str
    parameters: dict[str, Any] = Field(default_factory=dict)
    assertions: list[Assertion] = Field(default_factory=list)
    results: dict[str, Any] = Field(default_factory=dict)
    tolerances: dict[str, float] = Field(default_factory=dict)
    notes: list[str] = Field(default_factory=list)
    elapsed_s: float = 0.0

    @computed_field
    @property
    def ok(self) -> bool:
        return all_passed(self.assertions)

    def failed(self) -> list[str]:
        return [a.name for a in self.assertions if not a.passed]

    def extend(self, assertions: list[Assertion]) -> "ExperimentReport":
        self.assertions.extend(assertions)
        return self


# === Error Models ===


class ErrorResponse(BaseModel):
    """Structured error response for MCP tools."""

    error: str
    code: str
    details: dict | None = None
    suggestion: str | None = None

    @classmethod
    def from_error(cls, exc: QQLabError, suggestion: str = None) -> "ErrorResponse":
        return cls(
            error=exc.message, code=exc.code, details=exc.details or None, suggestion=suggestion
        )

    @classmethod
    def internal(cls, message: str) -> "ErrorResponse":
        return cls(
            error=message,
            code="INTERNAL_ERROR",
            suggestion="Re-run with QQLAB_LOG_LEVEL=DEBUG for the full trace",
        )

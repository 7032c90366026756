"""Exception hierarchy and logging helpers.

Every error carries a stable ``code`` string so the CLI and the MCP tools can
report failures without parsing messages.
"""

import logging

logger = logging.getLogger(__name__)


class QQLabError(Exception):
    """Base exception for qqlab errors."""

    def __init__(self, message: str, code: str, details: dict = None):
        super().__init__(message)
        self.message = message
        self.code = code
        self.details = details or {}


class ValidationError(QQLabError):
    """Invalid input parameters."""

    def __init__(self, message: str, field: str = None):
        super().__init__(message, "VALIDATION_ERROR", {"field": field})


class CapExceededError(QQLabError):
    """A size cap on an exponential state space was exceeded."""

    def __init__(self, quantity: str, value: int, cap: int):
        super().__init__(
            f"{quantity} = {value} exceeds the cap {cap}",
            "CAP_EXCEEDED",
            {"quantity": quantity, "value": value, "cap": cap},
        )


class NotHermitianError(QQLabError):
    """Matrix is not Hermitian within tolerance."""

    def __init__(self, max_asymmetry: float, tol: float):
        super().__init__(
            f"matrix is not Hermitian: max |M - M^H| = {max_asymmetry:.3e} > {tol:.1e}",
            "NOT_HERMITIAN",
            {"max_asymmetry": max_asymmetry, "tol": tol},
        )


class NotPSDError(QQLabError):
    """Matrix has an eigenvalue below -tol."""

    def __init__(self, eigenvalue: float, tol: float):
        super().__init__(
            f"matrix is not positive semidefinite: eigenvalue {eigenvalue:.3e} < -{tol:.1e}",
            "NOT_PSD",
            {"eigenvalue": eigenvalue, "tol": tol},
        )


class NotUnitaryError(QQLabError):
    """Matrix is not unitary within tolerance."""

    def __init__(self, deviation: float, tol: float, step: int = None):
        where = f" (U_{step})" if step is not None else ""
        super().__init__(
            f"matrix is not unitary{where}: max |U^H U - I| = {deviation:.3e} > {tol:.1e}",
            "NOT_UNITARY",
            {"deviation": deviation, "tol": tol, "step": step},
        )


class NotApplicableError(QQLabError):
    """A certificate's preconditions do not hold for this algorithm or input."""

    def __init__(self, message: str, **details):
        super().__init__(message, "NOT_APPLICABLE", details)


class InvariantViolation(QQLabError):
    """A proven identity or inequality failed numerically."""

    def __init__(self, message: str, **details):
        super().__init__(message, "INVARIANT_VIOLATION", details)


class SolverError(QQLabError):
    """LP or SDP solver did not converge."""

    def __init__(self, message: str, status: str = None, residual: float = None):
        super().__init__(message, "SOLVER_ERROR", {"status": status, "residual": residual})


class FormatError(QQLabError):
    """Malformed input file."""

    def __init__(self, message: str, path: str = None, line: int = None):
        super().__init__(message, "FORMAT_ERROR", {"path": path, "line": line})


def log_experiment(command: str, ok: bool, elapsed_s: float, failed: list[str] = None):
    """Log the outcome of an experiment."""
    if ok:
        logger.info(f"{command} passed ({elapsed_s * 1000:.1f}ms)")
    else:
        logger.warning(f"{command} failed assertions: {', '.join(failed or [])}")


def log_tool_call(tool_name: str, success: bool, error: str = None):
    """Log MCP tool calls."""
    if success:
        logger.info(f"Tool {tool_name} called successfully")
    else:
        logger.error(f"Tool {tool_name} failed: {error}")

"""Custom exceptions for varifrac errors.

This module provides a hierarchy of exceptions with structured details
for debugging.

Exceptions are mapped to process exit codes at the CLI layer in
varifrac.cli.exit_codes (single global mapping).
"""


class VarifracException(Exception):
    """Base exception for all varifrac errors.

    Attributes:
        message: Error message
        details: Optional structured details for debugging
    """
    message: str = "Internal varifrac error"

    def __init__(self, message: str | None = None, details: dict | None = None):
        self.message = message or self.message
        self.details = details or {}
        super().__init__(self.message)


# Input errors (exit 2)
class InputError(VarifracException):
    """Input file or flag is syntactically valid but unusable."""
    message = "Invalid input"


class MeshParseError(InputError):
    """Mesh/deformation/varifold JSON could not be parsed.

    Details should include: path, line, column, offset (byte offset of the failure).
    """
    message = "Malformed JSON input"


class ConfigurationError(InputError):
    """Scenario or config file is missing keys or carries invalid values.

    Details should include: path, missing_keys or validation_errors.
    """
    message = "Invalid configuration"


class DomainValidationError(InputError):
    """Domain constraints violated (p <= 1, negative density, unsupported order, etc.)."""
    message = "Domain validation failed"


# Geometry errors (exit 2 when raised on input, otherwise programming errors)
class DegenerateSimplexError(DomainValidationError):
    """Simplex with vanishing k-dimensional Hausdorff measure.

    Details should include: vertices, measure.
    """
    message = "Degenerate simplex"


class IdError(DomainValidationError):
    """Unknown simplex or vertex id."""
    message = "Unknown simplex id"


class DimensionError(DomainValidationError):
    """Mixed-dimension support or mismatched varifold dimensions."""
    message = "Dimension mismatch"


# Consistency errors (exit 3)
class ConsistencyError(VarifracException):
    """Inputs are individually valid but do not fit together."""
    message = "Inconsistent inputs"


class MeshError(ConsistencyError):
    """Deformation and varifold family do not share the ambient mesh."""
    message = "Mesh mismatch"


class MissingCurvatureError(ConsistencyError):
    """A nonempty varifold has no curvature field attached."""
    message = "Missing curvature field"


# Runtime errors (exit 4)
class RuntimeFailure(VarifracException):
    """Numerical procedure failed at runtime."""
    message = "Runtime failure"


class StepFailure(RuntimeFailure):
    """Quasistatic step could not produce an admissible state.

    Details should include:
    - step: int (load step index, when known)
    - reason: str (e.g., "det_nonpositive", "not_converged", "no_feasible_candidate")
    """
    message = "Quasistatic step failed"

    def __init__(self, message: str | None = None, details: dict | None = None, step: int | None = None):
        super().__init__(message, details)
        self.step = step if step is not None else self.details.get("step")
        if self.step is not None:
            self.details.setdefault("step", self.step)


class QuadratureError(RuntimeFailure):
    """Requested quadrature rule is unavailable."""
    message = "Quadrature rule unavailable"


__all__ = [
    # Base
    "VarifracException",
    # Input (2)
    "InputError",
    "MeshParseError",
    "ConfigurationError",
    "DomainValidationError",
    "DegenerateSimplexError",
    "IdError",
    "DimensionError",
    # Consistency (3)
    "ConsistencyError",
    "MeshError",
    "MissingCurvatureError",
    # Runtime (4)
    "RuntimeFailure",
    "StepFailure",
    "QuadratureError",
]

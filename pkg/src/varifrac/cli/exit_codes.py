"""Exception to process exit code mapping.

Single place where the exception hierarchy meets the shell. Only varifrac
exceptions map to 2 and 3; anything else is an internal failure:
0 success, 1 analysis-negative, 2 input error, 3 consistency error, 4 runtime failure.
"""

import structlog

from varifrac.core.exceptions import (
    ConsistencyError,
    InputError,
    StepFailure,
    VarifracException,
)

SUCCESS = 0
NEGATIVE = 1
INPUT_ERROR = 2
CONSISTENCY_ERROR = 3
RUNTIME_FAILURE = 4


def map_exception_to_exit_code(exc: BaseException) -> int:
    """Map an exception to the exit code contract.

    Args:
        exc: exception raised by a command

    Returns:
        2, 3 or 4
    """
    if isinstance(exc, InputError):
        return INPUT_ERROR
    if isinstance(exc, ConsistencyError):
        return CONSISTENCY_ERROR
    return RUNTIME_FAILURE


def report_exception(exc: BaseException) -> int:
    """Log the failure with its structured details and return the exit code."""
    logger = structlog.get_logger(__name__)
    code = map_exception_to_exit_code(exc)

    if isinstance(exc, VarifracException):
        message, details = exc.message, exc.details
    else:
        message, details = "Internal error", {}

    extra = {}
    if isinstance(exc, StepFailure) and exc.step is not None:
        extra["step"] = exc.step

    if code == RUNTIME_FAILURE and not isinstance(exc, VarifracException):
        logger.exception("command crashed", error=message, exit_code=code, error_type=type(exc).__name__)
    else:
        logger.error(
            "command failed",
            error=message,
            exit_code=code,
            error_type=type(exc).__name__,
            details=details,
            **extra,
        )
    return code

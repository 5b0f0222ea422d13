"""
SCALEFLOW - Error Hierarchy (Core Plumbing)
Exceptions raised by the library and their mapping onto CLI exit codes

Dependencies:
- cli_runner.py: Converts exceptions into exit codes and stderr reports
- All library modules: Raise InvalidInputError on bad arguments

Exit codes:
- 0: success
- 2: invalid input or configuration
- 3: output could not be written
"""

from typing import Any, Dict

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3


class ScaleflowError(Exception):
    """Base class for all scaleflow errors"""

    kind = "error"


class InvalidInputError(ScaleflowError, ValueError):
    """An argument violates a documented precondition"""

    kind = "invalid-input"


class ConfigError(InvalidInputError):
    """A run configuration (file or flags) is invalid"""

    kind = "invalid-config"


class OutputError(ScaleflowError, OSError):
    """An output file could not be written"""

    kind = "io-failure"


def exit_code_for(exc: BaseException) -> int:
    """
    Map an exception onto the documented exit code.

    Args:
        exc: Exception raised while running an experiment

    Returns:
        Exit code (2 for invalid input or numeric overflow, 3 for I/O failures)
    """
    if isinstance(exc, OutputError):
        return EXIT_IO
    if isinstance(exc, ValueError):
        # pydantic.ValidationError is a ValueError subclass
        return EXIT_INVALID
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_INVALID


def error_report(exc: BaseException) -> Dict[str, Any]:
    """Machine-readable description of a failure for the diagnostic stream"""
    if isinstance(exc, ScaleflowError):
        kind = exc.kind
    elif isinstance(exc, OSError):
        kind = OutputError.kind
    elif isinstance(exc, ArithmeticError):
        kind = InvalidInputError.kind
    else:
        kind = ConfigError.kind
    return {"error": kind, "detail": str(exc)}

from enum import Enum
from typing import Optional


class OptomechError(Exception):
    """Base class for all errors raised by the simulator."""


class ParameterError(OptomechError, ValueError):
    """A physical parameter or call precondition violates an invariant."""


class SingularSystemError(OptomechError):
    """The frequency-domain system matrix cannot be inverted."""

    def __init__(self, omega: float, condition: float):
        self.omega = omega
        self.condition = condition
        super().__init__(
            f"System matrix is singular at omega={omega:.6g} (condition number {condition:.3g})"
        )


class ConvergenceError(OptomechError):
    """Iterative root refinement did not converge within its iteration cap."""


class ConfigErrorCode(str, Enum):
    MISSING_KEY = "missing_key"
    NON_POSITIVE_RATE = "non_positive_rate"
    MALFORMED_NUMBER = "malformed_number"
    UNKNOWN_KEY = "unknown_key"
    UNKNOWN_SECTION = "unknown_section"
    INVALID_VALUE = "invalid_value"


class ConfigError(OptomechError):
    """A run configuration document is malformed or invalid."""

    def __init__(
        self, code: ConfigErrorCode, message: str, line: Optional[int] = None
    ):
        self.code = code
        self.line = line
        location = f" (line {line})" if line is not None else ""
        super().__init__(f"[{code.value}] {message}{location}")

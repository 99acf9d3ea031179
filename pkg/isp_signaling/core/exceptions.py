"""
Custom exception classes for solver and scenario errors.

This module defines the exception hierarchy raised by the library and
translated into process exit codes by the command-line front end.
"""

from dataclasses import dataclass
from typing import Any, List, Optional, Sequence


class SignalingError(Exception):
    """Base class for every error raised by isp_signaling."""

    exit_code: int = 1


@dataclass(frozen=True)
class Violation:
    """
    A single invariant breach.

    Attributes:
        path: Dotted field path (e.g. "market.alpha" or "distribution[1].probability")
        message: Human-readable description of the breach
        line: 1-based line in the scenario file, when known
    """

    path: str
    message: str
    line: Optional[int] = None

    def __str__(self) -> str:
        where = f" (line {self.line})" if self.line is not None else ""
        return f"{self.path}{where}: {self.message}"


class ValidationError(SignalingError, ValueError):
    """
    Raised when arguments or scenario fields break an invariant.

    Used for:
    - Probabilities not summing to one, non-positive baseline demand
    - Market parameters out of range (alpha <= (n-1) beta, n < 2)
    - ISP or signal index out of range
    - Price profile structure not matching the regime
    - Malformed scenario files (reported with line numbers)
    """

    exit_code = 2

    def __init__(self, message: str, violations: Optional[Sequence[Violation]] = None):
        self.violations: List[Violation] = list(violations or [])
        if self.violations:
            details = "; ".join(str(v) for v in self.violations)
            message = f"{message}: {details}"
        super().__init__(message)


class PreconditionError(SignalingError):
    """
    Raised when a solver's structural assumptions do not hold.

    Used for:
    - Best-response iteration on a demand model failing supermodularity,
      monotonicity or the dominant diagonal condition
    - A command run on a scenario lacking the block it needs
    """

    exit_code = 2

    def __init__(self, message: str, report: Any = None):
        self.report = report
        super().__init__(message)


class ConvergenceError(SignalingError):
    """
    Raised when best-response iteration exhausts its iteration budget.

    Carries the last price profile so callers can inspect how far it got.
    """

    exit_code = 3

    def __init__(self, message: str, last_profile: Any = None, iterations: int = 0):
        self.last_profile = last_profile
        self.iterations = iterations
        super().__init__(message)


class InfeasibilityError(SignalingError):
    """
    Raised when an equilibrium would need non-positive demand.

    Used for:
    - Side payments driving some ISP's demand to zero or below
    - Empty bracket for the pre-bargaining optimizer
    """

    exit_code = 4

    def __init__(self, message: str, signal: Optional[str] = None, isp: Optional[int] = None):
        self.signal = signal
        self.isp = isp
        super().__init__(message)


class DomainError(SignalingError, ValueError):
    """
    Raised when a closed form is evaluated outside its mathematical domain.

    Used for:
    - Negative square-root arguments in the incentive thresholds
    - Non-positive expected demand in the post-bargaining split
    """

    exit_code = 4


class ScenarioIOError(SignalingError):
    """Raised when a scenario or output file cannot be read or written."""

    exit_code = 5

    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        super().__init__(message)

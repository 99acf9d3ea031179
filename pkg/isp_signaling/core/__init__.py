# Core utilities
from .exceptions import (
    ConvergenceError,
    DomainError,
    InfeasibilityError,
    PreconditionError,
    ScenarioIOError,
    SignalingError,
    ValidationError,
    Violation,
)

__all__ = [
    "ConvergenceError",
    "DomainError",
    "InfeasibilityError",
    "PreconditionError",
    "ScenarioIOError",
    "SignalingError",
    "ValidationError",
    "Violation",
]

"""
Tests for solver settings and the error hierarchy.
"""

import pytest

from isp_signaling.config import Settings, get_settings, settings
from isp_signaling.core.exceptions import (
    ConvergenceError,
    DomainError,
    InfeasibilityError,
    PreconditionError,
    ScenarioIOError,
    SignalingError,
    ValidationError,
)


def test_settings_defaults():
    """Test the defaults used by every solver."""
    fresh = Settings(_env_file=None)
    assert fresh.SOLVER_TOL == 1e-10
    assert fresh.SOLVER_MAX_ITER == 10_000
    assert fresh.PRICE_CAP_FACTOR == 10.0
    assert get_settings() is settings


def test_settings_environment_override(monkeypatch):
    monkeypatch.setenv("ISP_SIGNALING_SOLVER_TOL", "1e-8")
    monkeypatch.setenv("ISP_SIGNALING_LOG_LEVEL", "DEBUG")
    fresh = Settings(_env_file=None)
    assert fresh.SOLVER_TOL == 1e-8
    assert fresh.LOG_LEVEL == "DEBUG"


@pytest.mark.parametrize(
    "error, code",
    [
        (ValidationError("bad"), 2),
        (PreconditionError("bad"), 2),
        (ConvergenceError("bad"), 3),
        (InfeasibilityError("bad", signal="L", isp=0), 4),
        (DomainError("bad"), 4),
        (ScenarioIOError("bad", path="x.yaml"), 5),
    ],
)
def test_exit_codes(error, code):
    assert isinstance(error, SignalingError)
    assert error.exit_code == code


def test_infeasibility_error_carries_context():
    error = InfeasibilityError("demand <= 0", signal="L", isp=1)
    assert error.signal == "L"
    assert error.isp == 1

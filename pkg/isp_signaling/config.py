"""
Solver configuration using Pydantic Settings.

Loads tolerances, iteration budgets and logging options from environment
variables (prefix ISP_SIGNALING_) or a local .env file.
"""

import logging
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Numerical defaults shared by every solver."""

    # Best-response iteration
    SOLVER_TOL: float = 1e-10
    SOLVER_MAX_ITER: int = 10_000

    # Price cap p_max = PRICE_CAP_FACTOR * E[D] / alpha
    PRICE_CAP_FACTOR: float = 10.0

    # Central finite differences use h = FD_STEP_SCALE * max(1, |p|)
    FD_STEP_SCALE: float = 1e-6
    # Mixed second derivatives need a wider step to stay above rounding noise
    FD2_STEP_SCALE: float = 1e-4
    ASSUMPTION_TOL: float = 1e-6

    # Bounded 1-D maximization
    OPTIMIZER_XATOL: float = 1e-10
    BRACKET_EPS_SCALE: float = 1e-9

    # Logging
    LOG_LEVEL: str = "WARNING"
    LOG_FORMAT: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    model_config = SettingsConfigDict(
        env_prefix="ISP_SIGNALING_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()


def get_settings() -> Settings:
    """Return the process-wide settings instance."""
    return settings


def configure_logging(level: Optional[str] = None) -> None:
    """
    Configure root logging for command-line use.

    Library modules only create loggers; handlers are installed here.

    Args:
        level: Override for settings.LOG_LEVEL
    """
    logging.basicConfig(
        level=getattr(logging, (level or settings.LOG_LEVEL).upper(), logging.WARNING),
        format=settings.LOG_FORMAT,
    )

"""
Demand models for the ISP price game.

This package contains the demand oracle interface, the linear and logit
models, moment computations and the structural assumption checks.
"""

from .assumptions import (
    DOMINANT_DIAGONAL,
    MONOTONICITY,
    SUPERMODULARITY,
    AssumptionCheck,
    AssumptionReport,
    check_assumptions,
    default_grid,
)
from .base import DemandOracle
from .linear import LinearDemand, default_price_cap, linear_demand
from .logit import LogitDemand
from .moments import moments

__all__ = [
    "DOMINANT_DIAGONAL",
    "MONOTONICITY",
    "SUPERMODULARITY",
    "AssumptionCheck",
    "AssumptionReport",
    "DemandOracle",
    "LinearDemand",
    "LogitDemand",
    "check_assumptions",
    "default_grid",
    "default_price_cap",
    "linear_demand",
    "moments",
]

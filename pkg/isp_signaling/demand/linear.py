"""
Linear demand model.

d_i(theta, p) = D(theta) - alpha p_i + beta sum_{j != i} p_j
"""

from typing import Optional, Sequence, Tuple

import numpy as np

from isp_signaling.config import settings
from isp_signaling.core.exceptions import ValidationError
from isp_signaling.demand.base import DemandOracle
from isp_signaling.demand.moments import moments
from isp_signaling.models import MarketParams, SignalDistribution


def _check_indices(i: int, theta_idx: int, n_prices: int, params: MarketParams, dist: SignalDistribution) -> None:
    if n_prices != params.n:
        raise ValidationError(f"expected {params.n} prices, got {n_prices}")
    if not 0 <= i < params.n:
        raise ValidationError(f"ISP index {i} out of range for n={params.n}")
    if not 0 <= theta_idx < dist.size:
        raise ValidationError(f"signal index {theta_idx} out of range for {dist.size} signals")


def linear_demand(
    i: int,
    theta_idx: int,
    prices: Sequence[float],
    params: MarketParams,
    dist: SignalDistribution,
) -> float:
    """
    Demand generated through ISP i under signal theta.

    Negative values are returned as-is; callers decide whether to flag them.

    Args:
        i: ISP index
        theta_idx: Signal index
        prices: One price per ISP, all >= 0
        params: Market constants
        dist: Signal distribution supplying D(theta)

    Returns:
        D(theta) - alpha p_i + beta sum_{j != i} p_j

    Raises:
        ValidationError: If an index is out of range or a price is negative
    """
    prices = np.asarray(prices, dtype=float)
    _check_indices(i, theta_idx, prices.size, params, dist)
    if np.any(prices < 0):
        raise ValidationError("prices must be non-negative")
    others = prices.sum() - prices[i]
    return float(dist.outcomes[theta_idx].baseline_demand - params.alpha * prices[i] + params.beta * others)


def default_price_cap(params: MarketParams, dist: SignalDistribution, factor: Optional[float] = None) -> float:
    """p_max = factor * E[D] / alpha, comfortably above every equilibrium in scope."""
    factor = settings.PRICE_CAP_FACTOR if factor is None else factor
    return factor * moments(dist).mean / params.alpha


class LinearDemand(DemandOracle):
    """Linear demand packaged as an oracle for the generic solver."""

    def __init__(self, params: MarketParams, dist: SignalDistribution, p_max: Optional[float] = None):
        super().__init__(params.n, dist.size)
        self.params = params
        self.dist = dist
        self._demands = dist.demands
        self.p_max = default_price_cap(params, dist) if p_max is None else p_max

    def __call__(self, theta_idx: int, prices: np.ndarray) -> np.ndarray:
        prices = np.asarray(prices, dtype=float)
        total = prices.sum()
        return self._demands[theta_idx] - self.params.alpha * prices + self.params.beta * (total - prices)

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.zeros(self.n), np.full(self.n, self.p_max)

"""
Logit demand model.

Each ISP's share of the market follows a multinomial logit with an outside
option; the signal scales the market size:

    d_i(theta, p) = D(theta) * exp(a - b p_i) / (1 + sum_j exp(a - b p_j))

The model is log-supermodular rather than supermodular in levels, so it
declares ``log_supermodular = True``.
"""

from typing import Optional, Tuple

import numpy as np

from isp_signaling.core.exceptions import ValidationError
from isp_signaling.demand.base import DemandOracle
from isp_signaling.models import SignalDistribution


class LogitDemand(DemandOracle):
    """
    Logit market shares scaled by the baseline demand.

    Attributes:
        attraction: Common quality index a
        sensitivity: Price coefficient b > 0
        p_max: Upper price bound (default 50 / b)
    """

    log_supermodular = True

    def __init__(
        self,
        n: int,
        dist: SignalDistribution,
        attraction: float = 1.0,
        sensitivity: float = 0.1,
        p_max: Optional[float] = None,
    ):
        if sensitivity <= 0:
            raise ValidationError(f"logit sensitivity must be > 0, got {sensitivity}")
        super().__init__(n, dist.size)
        self.attraction = attraction
        self.sensitivity = sensitivity
        self.p_max = 50.0 / sensitivity if p_max is None else p_max
        self._demands = dist.demands

    def shares(self, prices: np.ndarray) -> np.ndarray:
        utility = self.attraction - self.sensitivity * np.asarray(prices, dtype=float)
        # shift for numerical stability; the outside option has utility 0
        shift = max(0.0, float(utility.max()))
        weights = np.exp(utility - shift)
        return weights / (np.exp(-shift) + weights.sum())

    def __call__(self, theta_idx: int, prices: np.ndarray) -> np.ndarray:
        return self._demands[theta_idx] * self.shares(prices)

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.zeros(self.n), np.full(self.n, self.p_max)

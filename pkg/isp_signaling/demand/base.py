"""
Base demand oracle interface.

Defines the contract that every demand model must implement to be used by
the generic best-response solver and the assumption checker.
"""

from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np


class DemandOracle(ABC):
    """
    Abstract demand model d(theta, p).

    Subclasses map a signal index and a full price vector to the vector of
    per-ISP demands, and declare the price box on which they are defined.

    Attributes:
        n: Number of ISPs
        n_signals: Number of signal outcomes
        log_supermodular: True when the model's complementarity assumption is
            stated on log-demand rather than demand (e.g. logit)
    """

    log_supermodular: bool = False

    def __init__(self, n: int, n_signals: int):
        self.n = n
        self.n_signals = n_signals

    @abstractmethod
    def __call__(self, theta_idx: int, prices: np.ndarray) -> np.ndarray:
        """
        Evaluate demand.

        Args:
            theta_idx: Signal index
            prices: Price vector of length n

        Returns:
            Demand vector of length n
        """
        pass

    @abstractmethod
    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Declared domain of each price.

        Returns:
            (lower, upper) arrays of length n
        """
        pass

    def contains(self, prices: np.ndarray) -> bool:
        """Whether a price vector lies in the declared domain."""
        lower, upper = self.bounds()
        prices = np.asarray(prices, dtype=float)
        return bool(np.all(prices >= lower) and np.all(prices <= upper))

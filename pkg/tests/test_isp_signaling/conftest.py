"""
Shared fixtures for isp_signaling tests.

Provides the three-signal reference market, its stronger cross-price
variant and a seeded corpus of random valid duopoly markets.
"""

from pathlib import Path
from typing import List, Tuple

import numpy as np
import pytest

from isp_signaling.models import MarketParams, SignalDistribution

SCENARIO_DIR = Path(__file__).resolve().parents[2] / "scenarios"


@pytest.fixture
def reference_dist() -> SignalDistribution:
    """High/medium/low demand 200/50/20 with probabilities 0.1/0.6/0.3."""
    return SignalDistribution.from_values([200.0, 50.0, 20.0], [0.1, 0.6, 0.3], ["H", "M", "L"])


@pytest.fixture
def reference_params() -> MarketParams:
    return MarketParams(alpha=2.0, beta=1.0, p_a=5.0)


@pytest.fixture
def strong_cross_params() -> MarketParams:
    return MarketParams(alpha=2.0, beta=1.5, p_a=5.0)


@pytest.fixture
def degenerate_dist() -> SignalDistribution:
    """A single certain signal (zero variance)."""
    return SignalDistribution.from_values([50.0], [1.0], ["only"])


def random_markets(seed: int, count: int, n: int = 2) -> List[Tuple[MarketParams, SignalDistribution]]:
    """
    Seeded random markets satisfying alpha > (n-1) beta.

    Baseline demands spread over [10, 200], so an uninformed ISP may face
    negative demand under a low signal while its expected demand stays
    positive; solvers must accept those markets.
    """
    rng = np.random.default_rng(seed)
    markets = []
    for _ in range(count):
        alpha = float(rng.uniform(1.0, 3.0))
        beta = float(alpha / (n - 1) * rng.uniform(0.1, 0.9))
        p_a = float(rng.uniform(0.0, 10.0))
        m = int(rng.integers(2, 5))
        demands = rng.uniform(10.0, 200.0, size=m)
        probs = rng.dirichlet(np.ones(m))
        probs[-1] = 1.0 - probs[:-1].sum()
        markets.append(
            (MarketParams(alpha=alpha, beta=beta, p_a=p_a, n=n), SignalDistribution.from_values(demands, probs))
        )
    return markets


@pytest.fixture
def random_duopolies() -> List[Tuple[MarketParams, SignalDistribution]]:
    return random_markets(seed=20240611, count=24)

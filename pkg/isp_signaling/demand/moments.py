"""Moments of the baseline demand D(theta)."""

import numpy as np

from isp_signaling.models import Moments, SignalDistribution


def moments(dist: SignalDistribution) -> Moments:
    """
    Exact weighted moments over the finite signal space.

    The variance is computed from centred deviations, so it is non-negative
    and exactly zero when every baseline demand is equal.

    Args:
        dist: Signal distribution

    Returns:
        Moments with E[D], E[D^2] and Var(D)
    """
    probs = dist.probabilities
    demands = dist.demands
    mean = float(np.dot(probs, demands))
    second = float(np.dot(probs, demands * demands))
    variance = float(np.dot(probs, (demands - mean) ** 2))
    return Moments(mean=mean, second_moment=second, variance=variance)

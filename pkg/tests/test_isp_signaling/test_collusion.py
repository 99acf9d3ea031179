"""
Tests for the side-payment incentive thresholds and the p_d sweep.

Each analytic threshold is checked against a bisection on the matching
utility difference.
"""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from isp_signaling.collusion import (
    cp_gain_interval,
    cp_incentive_threshold,
    dominance_threshold,
    incentive_region,
    isp_incentive_threshold,
    sweep_pd,
)
from isp_signaling.core.exceptions import DomainError
from isp_signaling.demand import moments
from isp_signaling.equilibrium import (
    collusion_expected_utilities,
    feasible_side_payment_interval,
    solve_collusion_closed,
    solve_no_info_closed,
)
from isp_signaling.models import MarketParams, SignalDistribution

BISECTION_XTOL = 1e-10


def bisect(f, lo, hi):
    return brentq(f, lo, hi, xtol=BISECTION_XTOL)


# ============================================================================
# ISP incentive threshold
# ============================================================================


def test_isp_threshold_reference_value(reference_params, reference_dist):
    """Test the reference market gives 40 (1 - sqrt(1 - 22356/50176))."""
    expected = 40.0 * (1.0 - math.sqrt(1.0 - 9.0 * 2484.0 / (16.0 * 56.0 ** 2)))
    assert isp_incentive_threshold(reference_params, reference_dist) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(10.2157, abs=1e-4)


def test_isp_threshold_matches_bisection(reference_params, reference_dist):
    baseline = solve_no_info_closed(reference_params, reference_dist).expected_utility_isp[0]

    def gain(p_d):
        return collusion_expected_utilities(reference_params, reference_dist, p_d)[0] - baseline

    root = bisect(gain, 0.0, 30.0)
    assert isp_incentive_threshold(reference_params, reference_dist) == pytest.approx(root, abs=1e-8)


def test_isp_threshold_zero_variance(reference_params, degenerate_dist):
    """Test any positive side payment hurts when the signal carries no information."""
    assert isp_incentive_threshold(reference_params, degenerate_dist) == 0.0


def test_isp_threshold_scales_with_demand(reference_params, reference_dist):
    base = isp_incentive_threshold(reference_params, reference_dist)
    assert isp_incentive_threshold(reference_params, reference_dist.scaled(2.0)) == pytest.approx(2 * base, rel=1e-12)


def test_isp_threshold_domain_error(reference_params):
    """Test a heavy-tailed signal makes the square-root argument negative."""
    dist = SignalDistribution.from_values([1000.0, 1.0], [0.01, 0.99])
    with pytest.raises(DomainError, match="4 alpha\\^2 E\\[D\\]\\^2"):
        isp_incentive_threshold(reference_params, dist)


# ============================================================================
# CP incentive threshold
# ============================================================================


def test_cp_threshold_reference_value(reference_params, reference_dist):
    assert cp_incentive_threshold(reference_params, reference_dist) == pytest.approx(40.0 - 25.0 / 7.0, rel=1e-12)


def test_cp_threshold_matches_bisection(reference_params, reference_dist):
    baseline = collusion_expected_utilities(reference_params, reference_dist, 0.0)[2]

    def gain(p_d):
        return collusion_expected_utilities(reference_params, reference_dist, p_d)[2] - baseline

    root = bisect(gain, 1.0, 60.0)
    assert cp_incentive_threshold(reference_params, reference_dist) == pytest.approx(root, abs=1e-8)


def test_cp_threshold_without_ad_revenue(reference_dist):
    """Test p_a = 0 leaves only the positive demand term."""
    params = MarketParams(alpha=2.0, beta=1.0, p_a=0.0)
    assert cp_incentive_threshold(params, reference_dist) == pytest.approx(40.0)


def test_cp_threshold_sign_flip_in_ad_revenue(reference_dist):
    """Test the threshold crosses zero at p_a = E[D](4a^2-b^2)/((2a-b)(2a^2-b^2-ab))."""
    flip = 56.0 * 15.0 / (3.0 * 5.0)
    below = MarketParams(alpha=2.0, beta=1.0, p_a=flip - 1.0)
    above = MarketParams(alpha=2.0, beta=1.0, p_a=flip + 1.0)
    assert cp_incentive_threshold(below, reference_dist) > 0
    assert cp_incentive_threshold(above, reference_dist) < 0
    assert cp_gain_interval(above, reference_dist)[1] == 0.0


def test_cp_gain_interval(reference_params, reference_dist):
    lo, hi = cp_gain_interval(reference_params, reference_dist)
    assert lo == 0.0
    assert hi == pytest.approx(40.0 - 25.0 / 7.0)


# ============================================================================
# Dominance threshold
# ============================================================================


def test_dominance_threshold_matches_bisection(reference_params, reference_dist):
    def lead(p_d):
        u1, u2, _ = collusion_expected_utilities(reference_params, reference_dist, p_d)
        return u1 - u2

    root = bisect(lead, 0.0, 15.0)
    value = dominance_threshold(reference_params, reference_dist)
    assert value == pytest.approx(root, abs=1e-8)
    assert 0.0 < value < isp_incentive_threshold(reference_params, reference_dist)
    assert value == pytest.approx(7.423, abs=1e-3)


def test_dominance_threshold_zero_variance(reference_params, degenerate_dist):
    assert dominance_threshold(reference_params, degenerate_dist) == 0.0


def test_dominance_threshold_approaches_isp_threshold_without_cross_effects(reference_dist):
    params = MarketParams(alpha=2.0, beta=1e-9, p_a=5.0)
    assert dominance_threshold(params, reference_dist) == pytest.approx(
        isp_incentive_threshold(params, reference_dist), rel=1e-6
    )


def test_thresholds_scale_covariant(reference_params, reference_dist):
    """Test D -> cD and p_a -> c p_a scale all three thresholds by c."""
    scaled_params = MarketParams(alpha=2.0, beta=1.0, p_a=3.0 * reference_params.p_a)
    scaled_dist = reference_dist.scaled(3.0)
    for threshold in (isp_incentive_threshold, cp_incentive_threshold, dominance_threshold):
        assert threshold(scaled_params, scaled_dist) == pytest.approx(
            3.0 * threshold(reference_params, reference_dist), rel=1e-12
        )


def test_thresholds_match_bisection_random(random_duopolies):
    for params, dist in random_duopolies:
        baseline = solve_no_info_closed(params, dist).expected_utility_isp[0]
        try:
            value = isp_incentive_threshold(params, dist)
        except DomainError:
            continue
        if value == 0.0:
            continue

        def gain(p_d, params=params, dist=dist, baseline=baseline):
            return collusion_expected_utilities(params, dist, p_d)[0] - baseline

        # the gain is a convex quadratic with its minimum at q / k
        a, b = params.alpha, params.beta
        q = moments(dist).mean / (2 * a - b)
        k = (2 * a * a - b * b) / (4 * a * a - b * b)
        assert bisect(gain, 0.0, q / k) == pytest.approx(value, abs=1e-8)


# ============================================================================
# Regions and sweep
# ============================================================================


def test_incentive_region_reference(reference_params, reference_dist):
    region = incentive_region(reference_params, reference_dist)
    assert region.region_a == (0.0, pytest.approx(region.isp_threshold))
    assert region.region_b == (0.0, pytest.approx(region.cp_threshold))
    assert any("Var(D)" in note for note in region.notes)


def test_incentive_region_undefined_threshold(reference_params):
    dist = SignalDistribution.from_values([1000.0, 1.0], [0.01, 0.99])
    region = incentive_region(reference_params, dist)
    assert math.isnan(region.isp_threshold)
    assert region.region_a is None
    assert any("isp_threshold" in note for note in region.notes)


def test_sweep_pd_first_row_reproduces_free_signal(reference_params, reference_dist):
    rows = sweep_pd(reference_params, reference_dist, [0.0, 5.0])
    free = solve_collusion_closed(reference_params, reference_dist, 0.0)
    assert (rows[0].u_isp1, rows[0].u_isp2) == free.expected_utility_isp
    assert rows[0].u_cp == free.expected_utility_cp
    assert rows[0].in_region_a and rows[0].in_region_b


def test_sweep_pd_monotone(reference_params, reference_dist):
    """Test ISP 1 loses and ISP 2 gains as the side payment rises."""
    _, hi = feasible_side_payment_interval(reference_params, reference_dist)
    rows = sweep_pd(reference_params, reference_dist, np.linspace(-4.0, hi - 0.01, 40))
    assert all(r.feasible for r in rows)
    for before, after in zip(rows, rows[1:]):
        assert after.u_isp1 < before.u_isp1
        assert after.u_isp2 > before.u_isp2


def test_sweep_pd_marks_infeasible_rows(reference_params, reference_dist):
    rows = sweep_pd(reference_params, reference_dist, [5.0, 30.0, 12.0])
    assert [r.feasible for r in rows] == [True, False, True]
    assert math.isnan(rows[1].u_isp1)
    assert rows[1].in_region_a is False
    assert rows[0].in_region_a and not rows[2].in_region_a
    assert rows[2].in_region_b

"""
Unit tests for demand models, moments and assumption checks.
"""

import numpy as np
import pytest

from isp_signaling.core.exceptions import ValidationError
from isp_signaling.demand import (
    DOMINANT_DIAGONAL,
    MONOTONICITY,
    SUPERMODULARITY,
    DemandOracle,
    LinearDemand,
    LogitDemand,
    check_assumptions,
    default_grid,
    default_price_cap,
    linear_demand,
    moments,
)
from isp_signaling.models import MarketParams


class SubstitutesWrongSign(DemandOracle):
    """Demand falling in the rival's price (violates monotonicity)."""

    def __call__(self, theta_idx, prices):
        prices = np.asarray(prices, dtype=float)
        return 100.0 - prices - 0.5 * prices[::-1]

    def bounds(self):
        return np.zeros(self.n), np.full(self.n, 50.0)


class CrossConcave(DemandOracle):
    """d_i = 100 - 2 p_i + p_j - 0.05 p_i p_j: cross partial -0.05 < 0."""

    def __call__(self, theta_idx, prices):
        p = np.asarray(prices, dtype=float)
        q = p[::-1]
        return 100.0 - 2.0 * p + q - 0.05 * p * q

    def bounds(self):
        return np.zeros(self.n), np.full(self.n, 10.0)


# ============================================================================
# linear_demand tests
# ============================================================================


def test_linear_demand_value(reference_params, reference_dist):
    """Test D(theta) - alpha p_i + beta p_j."""
    assert linear_demand(0, 0, [10.0, 4.0], reference_params, reference_dist) == pytest.approx(184.0)
    assert linear_demand(1, 2, [10.0, 4.0], reference_params, reference_dist) == pytest.approx(22.0)


def test_linear_demand_may_be_negative(reference_params, reference_dist):
    """Test negative demand is returned, not clipped."""
    assert linear_demand(0, 2, [50.0, 0.0], reference_params, reference_dist) == pytest.approx(-80.0)


@pytest.mark.parametrize("delta", [-3.0, 0.5, 12.25])
def test_linear_demand_affine_in_own_price(reference_dist, delta):
    """Test raising p_i by delta lowers d_i by alpha delta and raises every rival's by beta delta."""
    params = MarketParams(alpha=3.0, beta=1.0, n=3)
    base = [10.0, 7.0, 4.0]
    stepped = [10.0, 7.0 + delta, 4.0]
    for t in range(reference_dist.size):
        before = [linear_demand(i, t, base, params, reference_dist) for i in range(3)]
        after = [linear_demand(i, t, stepped, params, reference_dist) for i in range(3)]
        assert after[1] - before[1] == pytest.approx(-params.alpha * delta, rel=1e-12)
        assert after[0] - before[0] == pytest.approx(params.beta * delta, rel=1e-12)
        assert after[2] - before[2] == pytest.approx(params.beta * delta, rel=1e-12)


def test_total_linear_demand_invariant_under_price_permutation(reference_dist):
    """Test sum_i d_i depends on the prices only through their sum."""
    params = MarketParams(alpha=3.0, beta=1.0, n=3)
    prices = [2.0, 5.0, 11.0]
    orders = ([0, 1, 2], [2, 0, 1], [1, 2, 0], [2, 1, 0])
    for t in range(reference_dist.size):
        totals = [
            sum(linear_demand(i, t, [prices[k] for k in order], params, reference_dist) for i in range(3))
            for order in orders
        ]
        assert totals == pytest.approx([totals[0]] * len(orders), rel=1e-12)


@pytest.mark.parametrize(
    "i, theta_idx, prices",
    [(2, 0, [1.0, 1.0]), (0, 3, [1.0, 1.0]), (0, 0, [1.0]), (0, 0, [-1.0, 1.0])],
)
def test_linear_demand_rejects_bad_arguments(reference_params, reference_dist, i, theta_idx, prices):
    with pytest.raises(ValidationError):
        linear_demand(i, theta_idx, prices, reference_params, reference_dist)


def test_linear_oracle_matches_function(reference_params, reference_dist):
    oracle = LinearDemand(reference_params, reference_dist)
    prices = np.array([12.0, 7.0])
    for t in range(reference_dist.size):
        expected = [linear_demand(i, t, prices, reference_params, reference_dist) for i in range(2)]
        np.testing.assert_allclose(oracle(t, prices), expected)


def test_default_price_cap(reference_params, reference_dist):
    assert default_price_cap(reference_params, reference_dist) == pytest.approx(280.0)


# ============================================================================
# moments tests
# ============================================================================


def test_moments_reference(reference_dist):
    """Test E[D]=56, E[D^2]=5620, Var(D)=2484."""
    mom = moments(reference_dist)
    assert mom.mean == pytest.approx(56.0)
    assert mom.second_moment == pytest.approx(5620.0)
    assert mom.variance == pytest.approx(2484.0)


def test_moments_degenerate_variance_is_exactly_zero(degenerate_dist):
    assert moments(degenerate_dist).variance == 0.0


# ============================================================================
# Assumption check tests
# ============================================================================


def test_check_linear_passes(reference_params):
    report = check_assumptions(reference_params)
    assert report.passed
    assert report.analytic


def test_check_linear_fails_dominant_diagonal():
    """Test alpha=2, beta=1, n=4 fails only the dominant diagonal."""
    report = check_assumptions(MarketParams(alpha=2.0, beta=1.0, n=4))
    assert not report.passed
    assert [c.name for c in report.failures()] == [DOMINANT_DIAGONAL]
    assert report[MONOTONICITY].passed
    assert report[SUPERMODULARITY].passed


def test_check_linear_oracle_numerically(reference_params, reference_dist):
    """Test the finite-difference path agrees with the analytic verdict."""
    oracle = LinearDemand(reference_params, reference_dist)
    report = check_assumptions(reference_params, oracle, default_grid(oracle))
    assert report.passed
    assert not report.analytic


def test_check_logit_passes(reference_params, reference_dist):
    """Test logit demand is log-supermodular with a dominant diagonal."""
    oracle = LogitDemand(2, reference_dist, attraction=1.0, sensitivity=0.05)
    report = check_assumptions(reference_params, oracle, default_grid(oracle))
    assert report.passed, [c.detail for c in report.failures()]


def test_check_oracle_reports_monotonicity_violation(reference_params):
    oracle = SubstitutesWrongSign(2, 1)
    report = check_assumptions(reference_params, oracle, default_grid(oracle))
    check = report[MONOTONICITY]
    assert not check.passed
    assert check.worst_point is not None
    assert check.worst_value > 0


def test_check_oracle_reports_supermodularity_violation(reference_params):
    oracle = CrossConcave(2, 1)
    report = check_assumptions(reference_params, oracle, default_grid(oracle))
    assert not report[SUPERMODULARITY].passed
    assert report[MONOTONICITY].passed


def test_check_oracle_requires_grid(reference_params, reference_dist):
    oracle = LinearDemand(reference_params, reference_dist)
    with pytest.raises(ValidationError):
        check_assumptions(reference_params, oracle)
    with pytest.raises(ValidationError):
        check_assumptions(reference_params, oracle, [])


def test_check_oracle_rejects_points_outside_domain(reference_params, reference_dist):
    oracle = LinearDemand(reference_params, reference_dist)
    with pytest.raises(ValidationError, match="outside"):
        check_assumptions(reference_params, oracle, [np.array([-1.0, 5.0])])


def test_logit_shares_sum_below_one(reference_dist):
    oracle = LogitDemand(3, reference_dist)
    shares = oracle.shares(np.array([1.0, 5.0, 10.0]))
    assert shares.sum() < 1.0
    assert shares[0] > shares[1] > shares[2]


def test_logit_rejects_non_positive_sensitivity(reference_dist):
    with pytest.raises(ValidationError):
        LogitDemand(2, reference_dist, sensitivity=0.0)

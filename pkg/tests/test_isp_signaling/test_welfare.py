"""
Tests for social welfare and the Price of Partial Bargaining.
"""

import math

import numpy as np
import pytest

from isp_signaling.core.exceptions import ValidationError
from isp_signaling.equilibrium import collusion_expected_utilities
from isp_signaling.welfare import (
    numeric_social_optimum,
    popb,
    social_optimal_side_payment,
    social_quadratic,
    social_search_bracket,
    social_utility,
    sweep_tau,
)
from isp_signaling.models import MarketParams

TAU_GRID = np.linspace(0.05, 0.95, 19)


def three_point_vertex(params, dist, step=10.0):
    left = social_utility(params, dist, -step)
    centre = social_utility(params, dist, 0.0)
    right = social_utility(params, dist, step)
    q2 = (left + right - 2.0 * centre) / (2.0 * step * step)
    q1 = (right - left) / (2.0 * step)
    return -q1 / (2.0 * q2)


# ============================================================================
# Social utility
# ============================================================================


def test_social_utility_sums_players(reference_params, reference_dist):
    u1, u2, u_cp = collusion_expected_utilities(reference_params, reference_dist, 7.0)
    assert social_utility(reference_params, reference_dist, 7.0) == pytest.approx(u1 + u2 + u_cp, rel=1e-14)


@pytest.mark.parametrize("p_d", [-20.0, 0.0, 3.5, 15.0])
def test_social_quadratic_matches_utility(reference_params, reference_dist, p_d):
    q2, q1, q0 = social_quadratic(reference_params, reference_dist)
    assert q2 < 0
    assert q2 * p_d ** 2 + q1 * p_d + q0 == pytest.approx(
        social_utility(reference_params, reference_dist, p_d), rel=1e-12
    )


def test_social_optimum_vertex(reference_params, reference_dist):
    vertex = social_optimal_side_payment(reference_params, reference_dist)
    assert vertex == pytest.approx(three_point_vertex(reference_params, reference_dist), rel=1e-9)
    assert vertex == pytest.approx(numeric_social_optimum(reference_params, reference_dist), abs=1e-6)
    assert vertex == pytest.approx(9.856, abs=1e-3)


def test_social_optimum_vertex_random(random_duopolies):
    for params, dist in random_duopolies:
        vertex = social_optimal_side_payment(params, dist)
        assert vertex == pytest.approx(three_point_vertex(params, dist), rel=1e-8, abs=1e-8)


def test_numeric_social_optimum_ignores_the_vertex(monkeypatch, reference_params, reference_dist):
    """Test the default bracket comes from the feasible interval, not the analytic vertex."""
    lo, hi = social_search_bracket(reference_params, reference_dist)
    assert lo == pytest.approx(-140.0 - 160.714, abs=1e-2)
    assert hi == pytest.approx(20.714 + 160.714, abs=1e-2)
    monkeypatch.setattr("isp_signaling.welfare.social_quadratic", lambda *args: pytest.fail("vertex used"))
    assert numeric_social_optimum(reference_params, reference_dist) == pytest.approx(9.856, abs=1e-3)


def test_social_optimum_beyond_feasible_interval_found_numerically(caplog, reference_dist):
    """Test tau = 0.95, whose vertex lies past the feasible interval, still agrees numerically."""
    params = MarketParams(alpha=2.0, beta=1.9, p_a=5.0)
    with caplog.at_level("WARNING", logger="isp_signaling.welfare"):
        vertex = social_optimal_side_payment(params, reference_dist)
    assert not [r for r in caplog.records if "disagrees" in r.getMessage()]
    assert not popb(params, reference_dist).vertex_feasible
    assert numeric_social_optimum(params, reference_dist) == pytest.approx(vertex, abs=1e-5)


def test_social_optimum_scales_with_demand_and_ad_revenue(reference_params, reference_dist):
    doubled = MarketParams(alpha=2.0, beta=1.0, p_a=2.0 * reference_params.p_a)
    assert social_optimal_side_payment(doubled, reference_dist.scaled(2.0)) == pytest.approx(
        2.0 * social_optimal_side_payment(reference_params, reference_dist), rel=1e-12
    )


def test_social_optimum_without_variance(reference_params, degenerate_dist):
    vertex = social_optimal_side_payment(reference_params, degenerate_dist)
    assert math.isfinite(vertex)
    assert popb(reference_params, degenerate_dist).popb >= 1.0


# ============================================================================
# PoPB
# ============================================================================


def test_popb_reference(reference_params, reference_dist):
    result = popb(reference_params, reference_dist)
    assert 1.0 <= result.popb < 1.001
    assert result.vertex_feasible
    assert result.popb == pytest.approx(result.social_utility_at_social / result.social_utility_at_nash)
    assert result.social_utility_at_nash == pytest.approx(
        social_utility(reference_params, reference_dist, result.p_d_nash)
    )


def test_popb_at_least_one_random(random_duopolies):
    for params, dist in random_duopolies:
        assert popb(params, dist).popb >= 1.0 - 1e-12


# ============================================================================
# tau sweep
# ============================================================================


def test_sweep_tau_rows(reference_dist):
    rows = sweep_tau(2.0, TAU_GRID, reference_dist, 5.0)
    assert len(rows) == 19
    assert all(row.error is None for row in rows)
    assert [row.beta for row in rows] == pytest.approx(list(2.0 * TAU_GRID))


def test_sweep_tau_minimum_near_half(reference_dist):
    rows = sweep_tau(2.0, TAU_GRID, reference_dist, 5.0)
    values = [row.popb for row in rows]
    best = int(np.argmin(values))
    assert rows[best].tau == pytest.approx(0.5)
    assert values[best] == pytest.approx(1.00006, abs=1e-5)
    assert values[0] == pytest.approx(1.043, abs=1e-3)
    assert values[-1] == pytest.approx(1.299, abs=1e-3)


def test_sweep_tau_flags_infeasible_vertex(reference_dist):
    rows = sweep_tau(2.0, [0.5, 0.95], reference_dist, 5.0)
    assert rows[0].vertex_feasible
    assert not rows[1].vertex_feasible


@pytest.mark.parametrize("tau", [0.0, 1.0, 1.2])
def test_sweep_tau_rejects_out_of_range(reference_dist, tau):
    with pytest.raises(ValidationError):
        sweep_tau(2.0, [0.5, tau], reference_dist, 5.0)

"""
Social welfare of the collusion equilibrium and the Price of Partial
Bargaining (PoPB) of the pre-bargaining mechanism.

Social utility is E[U_ISP1] + E[U_ISP2] + E[U_CP] at the duopoly collusion
equilibrium, a concave quadratic in the side payment.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from scipy.optimize import minimize_scalar

from isp_signaling.bargaining import pre_bargain_side_payment
from isp_signaling.config import settings
from isp_signaling.core.exceptions import DomainError, InfeasibilityError, SignalingError, ValidationError
from isp_signaling.demand import default_price_cap, moments
from isp_signaling.equilibrium import collusion_expected_utilities, feasible_side_payment_interval
from isp_signaling.models import MarketParams, PopbResult, SignalDistribution

logger = logging.getLogger(__name__)

NASH_GAMMA = 0.5
NUMERIC_AGREEMENT = 1e-6


def social_utility(params: MarketParams, dist: SignalDistribution, p_d: float) -> float:
    """Sum of both ISPs' and the CP's expected equilibrium utilities at p_d."""
    params.require_duopoly()
    params.require_valid()
    return math.fsum(collusion_expected_utilities(params, dist, p_d))


def social_quadratic(params: MarketParams, dist: SignalDistribution) -> Tuple[float, float, float]:
    """
    Coefficients (q2, q1, q0) with social_utility(p_d) = q2 p_d^2 + q1 p_d + q0.

    q2 = a^3 (3b^2 - 4a^2) / (4a^2 - b^2)^2 is negative whenever a > b.
    """
    params.require_duopoly()
    params.require_valid()
    a, b, p_a = params.alpha, params.beta, params.p_a
    mom = moments(dist)
    q = mom.mean / (2 * a - b)
    den = 4 * a * a - b * b
    k = (2 * a * a - b * b) / den
    h = a * b / den
    q2 = a ** 3 * (3 * b * b - 4 * a * a) / den ** 2
    q1 = a * q * (1 - 2 * k + 2 * h) - a * (2 * a * a - b * b - a * b) * p_a / den
    q0 = a * (mom.variance / (4 * a * a) + q * q) + a * q * q + 2 * a * q * p_a
    return q2, q1, q0


def social_search_bracket(params: MarketParams, dist: SignalDistribution) -> Tuple[float, float]:
    """
    Default search interval for numeric_social_optimum.

    The feasible side-payment interval widened by its own width on each
    side, or plus or minus the default price cap when that interval is empty.
    """
    try:
        lo, hi = feasible_side_payment_interval(params, dist)
    except InfeasibilityError:
        cap = default_price_cap(params, dist)
        return -cap, cap
    width = hi - lo
    return lo - width, hi + width


def numeric_social_optimum(
    params: MarketParams,
    dist: SignalDistribution,
    bounds: Optional[Tuple[float, float]] = None,
    xatol: Optional[float] = None,
) -> float:
    """Bounded scalar maximization of social_utility (default bounds: social_search_bracket)."""
    bounds = social_search_bracket(params, dist) if bounds is None else bounds
    xatol = settings.OPTIMIZER_XATOL if xatol is None else xatol
    result = minimize_scalar(
        lambda x: -social_utility(params, dist, x), bounds=bounds, method="bounded", options={"xatol": xatol}
    )
    return float(result.x)


def social_optimal_side_payment(params: MarketParams, dist: SignalDistribution) -> float:
    """
    Side payment maximizing social utility: the vertex -q1 / (2 q2).

    The vertex is cross-checked against numeric_social_optimum and a warning
    is logged on disagreement; a vertex outside the search bracket is logged
    at debug level instead.
    """
    q2, q1, _ = social_quadratic(params, dist)
    if not q2 < 0:
        raise DomainError(f"social utility is not concave in p_d (q2={q2!r})")
    vertex = -q1 / (2 * q2)
    lo, hi = social_search_bracket(params, dist)
    numeric = numeric_social_optimum(params, dist, bounds=(lo, hi))
    if not lo < vertex < hi:
        logger.debug("social optimum vertex %r lies outside the search bracket (%r, %r)", vertex, lo, hi)
    elif abs(numeric - vertex) > NUMERIC_AGREEMENT * max(1.0, abs(vertex)):
        logger.warning("social optimum vertex %r disagrees with numeric maximizer %r", vertex, numeric)
    return vertex


def _vertex_feasible(params: MarketParams, dist: SignalDistribution, p_d: float) -> bool:
    try:
        lo, hi = feasible_side_payment_interval(params, dist)
    except InfeasibilityError:
        return False
    return lo < p_d < hi


def popb(params: MarketParams, dist: SignalDistribution) -> PopbResult:
    """
    Price of Partial Bargaining.

    Ratio of the social utility at the welfare-maximizing side payment to
    the social utility at the pre-bargaining side payment with equal
    bargaining power (gamma = 1/2). Both are evaluated by social_utility.

    Raises:
        DomainError: If the social utility at the bargained side payment is not positive
    """
    p_d_social = social_optimal_side_payment(params, dist)
    p_d_nash = pre_bargain_side_payment(params, dist, NASH_GAMMA).side_payment
    at_social = social_utility(params, dist, p_d_social)
    at_nash = social_utility(params, dist, p_d_nash)
    if at_nash <= 0:
        raise DomainError(f"social utility at the bargained side payment is {at_nash!r} <= 0")

    feasible = _vertex_feasible(params, dist, p_d_social)
    if not feasible:
        logger.warning(
            "welfare-maximizing side payment %r lies outside the feasible interval (tau=%r)",
            p_d_social,
            params.tau,
        )
    return PopbResult(
        p_d_social=p_d_social,
        p_d_nash=p_d_nash,
        social_utility_at_social=at_social,
        social_utility_at_nash=at_nash,
        popb=at_social / at_nash,
        vertex_feasible=feasible,
    )


@dataclass(frozen=True)
class TauSweepRow:
    """PoPB at one cross-to-own sensitivity ratio; NaN values carry an ``error``."""

    tau: float
    beta: float
    popb: float
    pd_social: float
    pd_nash: float
    vertex_feasible: bool = True
    error: Optional[str] = None


def sweep_tau(alpha: float, tau_grid: Sequence[float], dist: SignalDistribution, p_a: float) -> List[TauSweepRow]:
    """
    PoPB as a function of tau = beta / alpha with alpha fixed.

    Args:
        alpha: Own-price sensitivity
        tau_grid: Ratios in (0, 1)
        dist: Signal distribution
        p_a: Advertising revenue per unit demand

    Returns:
        One TauSweepRow per tau, in grid order

    Raises:
        ValidationError: If some tau is outside (0, 1)
    """
    bad = [t for t in tau_grid if not 0.0 < t < 1.0]
    if bad:
        raise ValidationError(f"tau values must lie in (0, 1), got {bad}")

    rows: List[TauSweepRow] = []
    for tau in tau_grid:
        tau = float(tau)
        params = MarketParams(alpha=alpha, beta=tau * alpha, p_a=p_a)
        try:
            result = popb(params, dist)
        except SignalingError as e:
            logger.warning("tau=%r: %s", tau, e)
            rows.append(TauSweepRow(tau, params.beta, math.nan, math.nan, math.nan, False, error=str(e)))
            continue
        rows.append(
            TauSweepRow(
                tau=tau,
                beta=params.beta,
                popb=result.popb,
                pd_social=result.p_d_social,
                pd_nash=result.p_d_nash,
                vertex_feasible=result.vertex_feasible,
            )
        )
    return rows

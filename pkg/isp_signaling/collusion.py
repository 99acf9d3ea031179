"""
Side-payment incentive thresholds for collusion between the CP and one ISP.

All results are for the duopoly (n = 2) with linear demand, evaluated from
the closed-form expected utilities of the collusion equilibrium.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from isp_signaling.core.exceptions import DomainError, InfeasibilityError
from isp_signaling.demand import moments
from isp_signaling.equilibrium import solve_collusion_closed
from isp_signaling.models import IncentiveRegion, MarketParams, SignalDistribution

logger = logging.getLogger(__name__)


def _coefficients(params: MarketParams, dist: SignalDistribution):
    params.require_duopoly()
    params.require_valid()
    return params.alpha, params.beta, moments(dist)


def isp_incentive_threshold(params: MarketParams, dist: SignalDistribution) -> float:
    """
    Largest side payment at which the colluding ISP still out-earns its
    no-information equilibrium utility.

    This is the smaller root of E[U_ISP1](p_d) = E[U_ISP](no info):

        (2a+b) E[D] / (2a^2-b^2) * (1 - sqrt(1 - (2a-b)^2 Var(D) / (4 a^2 E[D]^2)))

    Raises:
        DomainError: If (2a-b)^2 Var(D) > 4 a^2 E[D]^2
    """
    a, b, mom = _coefficients(params, dist)
    ratio = (2 * a - b) ** 2 * mom.variance / (4 * a * a * mom.mean ** 2)
    if ratio > 1.0:
        raise DomainError(
            f"(2*alpha-beta)^2 Var(D) <= 4 alpha^2 E[D]^2 violated: ratio {ratio!r} > 1"
        )
    return (2 * a + b) * mom.mean / (2 * a * a - b * b) * (1.0 - math.sqrt(1.0 - ratio))


def cp_incentive_threshold(params: MarketParams, dist: SignalDistribution) -> float:
    """
    Side payment beyond which collusion no longer raises the CP's revenue.

    May be negative: with large advertising revenue the demand lost to any
    positive side payment outweighs the payment itself.
    """
    a, b, mom = _coefficients(params, dist)
    base = mom.mean * (4 * a * a - b * b) / ((2 * a - b) * (2 * a * a - b * b))
    return base - (2 * a * a - b * b - a * b) * params.p_a / (2 * a * a - b * b)


def cp_gain_interval(params: MarketParams, dist: SignalDistribution) -> Optional[Tuple[float, float]]:
    """
    Open interval of side payments where the CP earns more than at p_d = 0.

    The CP's expected utility is a concave quadratic in p_d with roots 0 and
    cp_incentive_threshold; returns None when the two roots coincide.
    """
    root = cp_incentive_threshold(params, dist)
    if root == 0.0:
        return None
    return (min(0.0, root), max(0.0, root))


def dominance_threshold(params: MarketParams, dist: SignalDistribution) -> float:
    """
    Largest side payment at which the colluding ISP earns more than the
    uninformed ISP.

    Smaller root of E[U_ISP1](p_d) = E[U_ISP2](p_d). With
    r = (2a^2-b^2-ab) / (2a^2-b^2+ab):

        (2a+b) E[D] / (2a^2-b^2-ab) * (1 - sqrt(1 - r (2a-b)^2 Var(D) / (4 a^2 E[D]^2)))

    Raises:
        DomainError: If the square-root argument is negative
    """
    a, b, mom = _coefficients(params, dist)
    minus = 2 * a * a - b * b - a * b
    plus = 2 * a * a - b * b + a * b
    ratio = (2 * a - b) ** 2 * mom.variance * minus / (4 * a * a * mom.mean ** 2 * plus)
    if ratio > 1.0:
        raise DomainError(
            "(2*alpha-beta)^2 Var(D) (2a^2-b^2-ab) <= 4 alpha^2 E[D]^2 (2a^2-b^2+ab) violated: "
            f"ratio {ratio!r} > 1"
        )
    return (2 * a + b) * mom.mean / minus * (1.0 - math.sqrt(1.0 - ratio))


def incentive_region(params: MarketParams, dist: SignalDistribution) -> IncentiveRegion:
    """
    Thresholds and the beneficial-collusion regions on p_d >= 0.

    Region A, where both the colluding ISP and the CP gain, is
    [0, min(isp_threshold, cp_threshold)]; region B, where the CP gains, is
    [0, cp_threshold]. A threshold whose square root is not real is NaN and
    the reason is recorded in ``notes``.
    """
    notes: List[str] = []
    mom = moments(dist)
    if mom.variance > mom.mean:
        notes.append(
            f"Var(D)={mom.variance!r} exceeds E[D]={mom.mean!r}; thresholds gated on the "
            "square-root argument instead"
        )

    try:
        isp = isp_incentive_threshold(params, dist)
    except DomainError as e:
        isp = math.nan
        notes.append(f"isp_threshold undefined: {e}")
    try:
        dominance = dominance_threshold(params, dist)
    except DomainError as e:
        dominance = math.nan
        notes.append(f"dominance_threshold undefined: {e}")
    cp = cp_incentive_threshold(params, dist)

    edge = min(isp, cp)
    region_a = (0.0, edge) if edge > 0 else None
    region_b = (0.0, cp) if cp > 0 else None
    for note in notes:
        logger.warning(note)
    return IncentiveRegion(
        isp_threshold=isp,
        cp_threshold=cp,
        dominance_threshold=dominance,
        region_a=region_a,
        region_b=region_b,
        notes=tuple(notes),
    )


def _within(value: float, interval: Optional[Tuple[float, float]]) -> bool:
    return interval is not None and interval[0] <= value <= interval[1]


@dataclass(frozen=True)
class PdSweepRow:
    """
    Equilibrium utilities at one side payment.

    Utilities are NaN when ``feasible`` is False.
    """

    p_d: float
    u_isp1: float
    u_isp2: float
    u_cp: float
    in_region_a: bool
    in_region_b: bool
    feasible: bool = True


def sweep_pd(params: MarketParams, dist: SignalDistribution, grid: Sequence[float]) -> List[PdSweepRow]:
    """
    Collusion-equilibrium utilities over a grid of side payments.

    Side payments with a non-positive equilibrium demand give a row marked
    infeasible instead of aborting the sweep.

    Args:
        params: Market constants (n = 2)
        dist: Signal distribution
        grid: Side payments to evaluate, in order

    Returns:
        One PdSweepRow per grid point
    """
    region = incentive_region(params, dist)
    rows: List[PdSweepRow] = []
    for p_d in grid:
        p_d = float(p_d)
        try:
            outcome = solve_collusion_closed(params, dist, p_d)
        except InfeasibilityError as e:
            logger.debug("p_d=%r infeasible: %s", p_d, e)
            rows.append(PdSweepRow(p_d, math.nan, math.nan, math.nan, False, False, feasible=False))
            continue
        u1, u2 = outcome.expected_utility_isp
        rows.append(
            PdSweepRow(
                p_d=p_d,
                u_isp1=u1,
                u_isp2=u2,
                u_cp=outcome.expected_utility_cp,
                in_region_a=_within(p_d, region.region_a),
                in_region_b=_within(p_d, region.region_b),
            )
        )
    infeasible = sum(not r.feasible for r in rows)
    if infeasible:
        logger.info("%d of %d side payments give non-positive demand", infeasible, len(rows))
    return rows

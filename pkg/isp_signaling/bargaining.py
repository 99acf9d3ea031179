"""
Side-payment bargaining between the CP and the informed ISP.

An arbitrator picks p_d by weighted proportional fairness, maximizing
E[U_ISP1]^gamma * E[U_CP1]^(1-gamma), where U_CP1 is the CP revenue earned
through the informed ISP's traffic. In pre-bargaining p_d is fixed before
the ISPs compete on price; in post-bargaining the ISPs compete first,
anticipating the split of the pooled revenue.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from isp_signaling.config import settings
from isp_signaling.core.exceptions import DomainError, InfeasibilityError, SignalingError
from isp_signaling.demand import moments
from isp_signaling.equilibrium import (
    feasible_side_payment_interval,
    solve_collusion_closed,
    solve_post_bargain_closed,
)
from isp_signaling.models import (
    BargainingMode,
    BargainOutcome,
    EquilibriumOutcome,
    MarketParams,
    SignalDistribution,
    validate_gamma,
)

logger = logging.getLogger(__name__)


def regulator_log_utility(gamma: float, isp_share: float, cp_share: float) -> float:
    """
    gamma log(isp_share) + (1 - gamma) log(cp_share).

    Raises:
        DomainError: If either share is not positive
    """
    if isp_share <= 0 or cp_share <= 0:
        raise DomainError(f"log utility undefined for shares ({isp_share!r}, {cp_share!r})")
    return gamma * math.log(isp_share) + (1.0 - gamma) * math.log(cp_share)


def _outcome(
    mode: BargainingMode,
    gamma: float,
    p_d: float,
    equilibrium: EquilibriumOutcome,
    dist: SignalDistribution,
    p_a: float,
) -> BargainOutcome:
    isp = equilibrium.regime.informed_isp
    # under post-bargaining this is already gamma * T
    isp_share = equilibrium.expected_utility_isp[isp]
    cp_share = equilibrium.expected_demand(isp, dist) * (p_a + p_d)
    return BargainOutcome(
        mode=mode,
        gamma=gamma,
        side_payment=p_d,
        equilibrium=equilibrium,
        isp_share=isp_share,
        cp_share=cp_share,
        regulator_log_utility=regulator_log_utility(gamma, isp_share, cp_share),
    )


# ============================================================================
# Pre-bargaining
# ============================================================================


def pre_bargain_bracket(params: MarketParams, dist: SignalDistribution) -> Tuple[float, float]:
    """
    Search interval for the pre-bargaining side payment.

    The lower edge is the larger of -p_a and the feasibility edge, the upper
    edge the largest p_d keeping every demand positive; both are pulled in by
    eps = BRACKET_EPS_SCALE * max(1, p_a).

    Raises:
        InfeasibilityError: If the interval is empty
    """
    lo_feasible, hi_feasible = feasible_side_payment_interval(params, dist)
    eps = settings.BRACKET_EPS_SCALE * max(1.0, params.p_a)
    lo = max(lo_feasible, -params.p_a) + eps
    hi = hi_feasible - eps
    if not lo < hi:
        raise InfeasibilityError(f"empty side-payment bracket ({lo!r}, {hi!r})")
    return lo, hi


class PreBargainObjective:
    """
    Log of the arbitrator's objective and its derivative in p_d.

    With b(theta) = c(theta) - k p_d the informed ISP earns alpha E[b^2] and
    the CP earns alpha E[b] (p_a + p_d) from its traffic.
    """

    def __init__(self, params: MarketParams, dist: SignalDistribution, gamma: float):
        a, b = params.alpha, params.beta
        mean = moments(dist).mean
        self.gamma = gamma
        self.p_a = params.p_a
        self.alpha = a
        self.k = (2 * a * a - b * b) / (4 * a * a - b * b)
        self.c = dist.demands / (2 * a) + b * mean / (2 * a * (2 * a - b))
        self.probs = dist.probabilities

    def _brackets(self, p_d: float) -> Tuple[float, float]:
        bracket = self.c - self.k * p_d
        return float(self.probs @ bracket), float(self.probs @ bracket ** 2)

    def __call__(self, p_d: float) -> float:
        first, second = self._brackets(p_d)
        if first <= 0 or self.p_a + p_d <= 0:
            return -math.inf
        return self.gamma * math.log(self.alpha * second) + (1.0 - self.gamma) * math.log(
            self.alpha * first * (self.p_a + p_d)
        )

    def derivative(self, p_d: float) -> float:
        first, second = self._brackets(p_d)
        g = self.gamma
        return -2.0 * g * self.k * first / second - (1.0 - g) * self.k / first + (1.0 - g) / (self.p_a + p_d)


def pre_bargain_side_payment(
    params: MarketParams,
    dist: SignalDistribution,
    gamma: float,
    xatol: Optional[float] = None,
) -> BargainOutcome:
    """
    Side payment fixed by the arbitrator before price competition.

    Maximizes gamma log E[U_ISP1](p_d) + (1-gamma) log(E[d_1](p_a + p_d))
    over the feasible bracket with a bounded scalar search, then polishes
    the stationary point with brentq on the analytic derivative.

    Args:
        params: Market constants (n = 2)
        dist: Signal distribution
        gamma: Bargaining power of the informed ISP, in (0, 1)
        xatol: Absolute tolerance of the bounded search

    Returns:
        BargainOutcome with the resulting collusion equilibrium

    Raises:
        ValidationError: If gamma is outside (0, 1) or the market is invalid
        InfeasibilityError: If the feasible bracket is empty
    """
    params.require_duopoly()
    params.require_valid()
    validate_gamma(gamma)
    xatol = settings.OPTIMIZER_XATOL if xatol is None else xatol

    lo, hi = pre_bargain_bracket(params, dist)
    objective = PreBargainObjective(params, dist, gamma)
    result = minimize_scalar(lambda x: -objective(x), bounds=(lo, hi), method="bounded", options={"xatol": xatol})
    p_d = float(result.x)

    d_lo, d_hi = objective.derivative(lo), objective.derivative(hi)
    if d_lo > 0 > d_hi:
        p_d = float(brentq(objective.derivative, lo, hi, xtol=1e-14, maxiter=200))
    else:
        logger.debug("pre-bargaining optimum at the bracket edge (derivatives %r, %r)", d_lo, d_hi)
    logger.debug("pre-bargaining gamma=%r bracket=(%r, %r) p_d=%r", gamma, lo, hi, p_d)

    equilibrium = solve_collusion_closed(params, dist, p_d)
    return _outcome(BargainingMode.PRE, gamma, p_d, equilibrium, dist, params.p_a)


# ============================================================================
# Post-bargaining
# ============================================================================


def post_bargain_side_payment(
    p1_profile: Union[Mapping[str, float], Sequence[float], np.ndarray],
    p2: float,
    params: MarketParams,
    dist: SignalDistribution,
    gamma: float,
) -> float:
    """
    Side payment set after the ISPs have fixed their prices.

    The weighted Nash product E[d_1(p_1 - p_d)]^gamma E[d_1(p_a + p_d)]^(1-gamma)
    is maximized at

        p_d* = ((1 - gamma) E[d_1 p_1] - gamma E[d_1] p_a) / E[d_1]

    which splits the pooled revenue T = E[d_1(p_1 + p_a)] as gamma T and
    (1 - gamma) T.

    Args:
        p1_profile: Informed ISP price per signal (by label, or in signal order)
        p2: Flat price of the uninformed ISP
        params: Market constants (n = 2)
        dist: Signal distribution
        gamma: Bargaining power of the informed ISP

    Raises:
        DomainError: If E[d_1] <= 0
    """
    validate_gamma(gamma)
    if isinstance(p1_profile, Mapping):
        p1 = np.array([p1_profile[label] for label in dist.labels], dtype=float)
    else:
        p1 = np.asarray(p1_profile, dtype=float)
    d1 = dist.demands - params.alpha * p1 + params.beta * p2
    mean_d1 = dist.expect(d1)
    if mean_d1 <= 0:
        raise DomainError(f"E[d_1] = {mean_d1!r} <= 0 at the given prices")
    return ((1.0 - gamma) * dist.expect(d1 * p1) - gamma * mean_d1 * params.p_a) / mean_d1


def post_bargain_equilibrium(params: MarketParams, dist: SignalDistribution, gamma: float) -> BargainOutcome:
    """
    Post-bargaining equilibrium and the side payment recovered from it.

    The informed ISP prices as if p_d = -p_a and receives gamma T; the CP
    receives (1 - gamma) T plus p_a per unit of the other ISP's demand.
    """
    equilibrium = solve_post_bargain_closed(params, dist, gamma)
    isp = equilibrium.regime.informed_isp
    p_d = post_bargain_side_payment(
        equilibrium.profile.prices[isp],
        equilibrium.profile.flat_price(1 - isp),
        params,
        dist,
        gamma,
    )
    return _outcome(BargainingMode.POST, gamma, p_d, equilibrium, dist, params.p_a)


def bargain(params: MarketParams, dist: SignalDistribution, gamma: float, mode: BargainingMode) -> BargainOutcome:
    """Run the mechanism named by mode."""
    if BargainingMode(mode) is BargainingMode.PRE:
        return pre_bargain_side_payment(params, dist, gamma)
    return post_bargain_equilibrium(params, dist, gamma)


# ============================================================================
# Mechanism comparison
# ============================================================================


@dataclass(frozen=True)
class GammaSweepRow:
    """
    Both mechanisms at one bargaining power.

    Values are NaN and ``error`` is set when a solver failed for this gamma.
    """

    gamma: float
    pre_u_isp1: float
    pre_u_cp: float
    pre_pd: float
    post_u_isp1: float
    post_u_cp: float
    post_pd: float
    error: Optional[str] = None


@dataclass(frozen=True)
class Crossover:
    """
    Bargaining power at which a player switches its preferred mechanism.

    Attributes:
        player: "cp" or "isp1"
        gamma: Location of the sign change
        prefers_pre_below: True if the player prefers pre-bargaining for
            gamma below the crossover
    """

    player: str
    gamma: float
    prefers_pre_below: bool


@dataclass(frozen=True)
class ModeComparison:
    """Per-gamma rows and the located crossovers."""

    rows: Tuple[GammaSweepRow, ...]
    crossovers: Tuple[Crossover, ...]

    def for_player(self, player: str) -> List[Crossover]:
        return [c for c in self.crossovers if c.player == player]


def _differences(params: MarketParams, dist: SignalDistribution, gamma: float) -> Tuple[float, float]:
    pre = pre_bargain_side_payment(params, dist, gamma)
    post = post_bargain_equilibrium(params, dist, gamma)
    return (
        pre.equilibrium.expected_utility_cp - post.equilibrium.expected_utility_cp,
        pre.isp_share - post.isp_share,
    )


def compare_modes(params: MarketParams, dist: SignalDistribution, gamma_grid: Sequence[float]) -> ModeComparison:
    """
    Evaluate pre- and post-bargaining over a grid of bargaining powers.

    CP utilities are the CP's full expected utility in each equilibrium.
    Sign changes of the CP and informed-ISP utility differences between
    adjacent grid points are located with brentq.

    Args:
        params: Market constants (n = 2)
        dist: Signal distribution
        gamma_grid: Increasing bargaining powers in (0, 1)

    Returns:
        ModeComparison
    """
    for gamma in gamma_grid:
        validate_gamma(gamma)

    rows: List[GammaSweepRow] = []
    diffs: List[Optional[Tuple[float, float]]] = []
    for gamma in gamma_grid:
        gamma = float(gamma)
        try:
            pre = pre_bargain_side_payment(params, dist, gamma)
            post = post_bargain_equilibrium(params, dist, gamma)
        except SignalingError as e:
            logger.warning("gamma=%r: %s", gamma, e)
            nan = math.nan
            rows.append(GammaSweepRow(gamma, nan, nan, nan, nan, nan, nan, error=str(e)))
            diffs.append(None)
            continue
        rows.append(
            GammaSweepRow(
                gamma=gamma,
                pre_u_isp1=pre.isp_share,
                pre_u_cp=pre.equilibrium.expected_utility_cp,
                pre_pd=pre.side_payment,
                post_u_isp1=post.isp_share,
                post_u_cp=post.equilibrium.expected_utility_cp,
                post_pd=post.side_payment,
            )
        )
        diffs.append(
            (
                pre.equilibrium.expected_utility_cp - post.equilibrium.expected_utility_cp,
                pre.isp_share - post.isp_share,
            )
        )

    crossovers: List[Crossover] = []
    for slot, player in enumerate(("cp", "isp1")):
        for k in range(len(rows) - 1):
            if diffs[k] is None or diffs[k + 1] is None:
                continue
            left, right = diffs[k][slot], diffs[k + 1][slot]
            if left == 0.0 or left * right >= 0:
                continue
            g = brentq(
                lambda x: _differences(params, dist, x)[slot],
                rows[k].gamma,
                rows[k + 1].gamma,
                xtol=1e-12,
            )
            crossovers.append(Crossover(player=player, gamma=float(g), prefers_pre_below=left > 0))
            logger.info(
                "%s crossover at gamma=%r, prefers %s bargaining below",
                player,
                g,
                "pre" if left > 0 else "post",
            )
    return ModeComparison(rows=tuple(rows), crossovers=tuple(crossovers))

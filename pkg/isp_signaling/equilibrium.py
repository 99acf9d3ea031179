"""
Nash equilibrium prices and expected utilities.

Closed forms cover the linear model (symmetric n for the neutral regimes,
n=2 for collusion and post-bargaining); best-response iteration covers any
n and any demand oracle satisfying the structural assumptions.
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from isp_signaling.config import settings
from isp_signaling.core.exceptions import (
    ConvergenceError,
    InfeasibilityError,
    PreconditionError,
    ValidationError,
)
from isp_signaling.demand import (
    DemandOracle,
    check_assumptions,
    default_grid,
    default_price_cap,
    moments,
)
from isp_signaling.models import (
    Collusion,
    EquilibriumOutcome,
    FullInfo,
    MarketParams,
    NoInfo,
    PostBargain,
    PriceProfile,
    Regime,
    SignalDistribution,
    cost_offsets,
    informed_mask,
    validate_gamma,
)

logger = logging.getLogger(__name__)

CROSS_VALIDATION_RTOL = 1e-9


# ============================================================================
# Demands and utilities
# ============================================================================


def demand_matrix(
    prices: np.ndarray,
    params: MarketParams,
    dist: SignalDistribution,
    oracle: Optional[DemandOracle] = None,
) -> np.ndarray:
    """
    Per-ISP, per-signal demands for a price matrix of shape (n, m).

    Args:
        prices: Price matrix
        params: Market constants
        dist: Signal distribution
        oracle: Generic demand model, or None for linear demand

    Returns:
        Demand matrix of shape (n, m)
    """
    if oracle is None:
        others = prices.sum(axis=0)[None, :] - prices
        return dist.demands[None, :] - params.alpha * prices + params.beta * others
    return np.column_stack([oracle(t, prices[:, t]) for t in range(prices.shape[1])])


def _utilities(
    regime: Regime,
    prices: np.ndarray,
    demands: np.ndarray,
    params: MarketParams,
    dist: SignalDistribution,
) -> Tuple[Tuple[float, ...], float]:
    probs = dist.probabilities
    margins = prices - cost_offsets(regime, params)[:, None]
    u_isp = (margins * demands) @ probs
    expected_demand = demands @ probs
    u_cp = params.p_a * float(expected_demand.sum())

    if isinstance(regime, Collusion):
        u_cp += regime.side_payment * float(expected_demand[regime.informed_isp])
    elif isinstance(regime, PostBargain):
        k = regime.informed_isp
        pooled = float(u_isp[k])
        u_isp[k] = regime.gamma * pooled
        u_cp = params.p_a * float(expected_demand.sum() - expected_demand[k]) + (1.0 - regime.gamma) * pooled

    return tuple(float(u) for u in u_isp), float(u_cp)


def expected_utilities(
    profile: PriceProfile,
    regime: Regime,
    params: MarketParams,
    dist: SignalDistribution,
    oracle: Optional[DemandOracle] = None,
) -> Tuple[Tuple[float, ...], float]:
    """
    Expected utility of every ISP and of the CP at a price profile.

    Under collusion the CP receives p_a + p_d per unit of the informed ISP's
    demand and p_a per unit of the others; the informed ISP earns p_i - p_d.
    In the post-bargaining game the informed ISP and the CP split the pooled
    revenue E[d(p + p_a)] in proportions gamma and 1 - gamma.

    Args:
        profile: Prices of every ISP
        regime: Information regime
        params: Market constants
        dist: Signal distribution
        oracle: Generic demand model, or None for linear demand

    Returns:
        (per-ISP expected utilities, CP expected utility)

    Raises:
        ValidationError: If the profile structure does not match the regime
    """
    if profile.prices.shape != (params.n, dist.size):
        raise ValidationError(
            f"profile shape {profile.prices.shape} does not match (n={params.n}, signals={dist.size})"
        )
    expected_mask = tuple(bool(f) for f in informed_mask(regime, params.n))
    if profile.informed != expected_mask:
        raise ValidationError(
            f"profile informed structure {profile.informed} does not match regime {regime.name}"
        )
    demands = demand_matrix(profile.prices, params, dist, oracle)
    return _utilities(regime, profile.prices, demands, params, dist)


def build_outcome(
    regime: Regime,
    prices: np.ndarray,
    params: MarketParams,
    dist: SignalDistribution,
    oracle: Optional[DemandOracle] = None,
    converged: bool = True,
    iterations: int = 0,
) -> EquilibriumOutcome:
    """
    Assemble an EquilibriumOutcome, refusing non-positive demand.

    An informed ISP prices signal by signal, so its demand must be positive
    under every signal. An uninformed ISP commits to one flat price and only
    its expected demand must be positive; a negative demand under a single
    signal is recorded in ``notes`` and logged.

    Raises:
        InfeasibilityError: If an informed ISP's demand is <= 0 under some
            signal (naming the signal and ISP), or an uninformed ISP's
            expected demand is <= 0 (signal None)
    """
    mask = informed_mask(regime, params.n)
    profile = PriceProfile(prices, tuple(mask))
    demands = demand_matrix(profile.prices, params, dist, oracle)
    expected = demands @ dist.probabilities
    notes = []
    for isp in range(params.n):
        if mask[isp]:
            bad = np.flatnonzero(demands[isp] <= 0)
            if bad.size:
                label = dist.labels[int(bad[0])]
                raise InfeasibilityError(
                    f"demand of informed ISP {isp + 1} is {demands[isp, bad[0]]!r} <= 0 "
                    f"at signal {label!r} under regime {regime.name}",
                    signal=label,
                    isp=isp,
                )
            continue
        if not expected[isp] > 0:
            raise InfeasibilityError(
                f"expected demand of uninformed ISP {isp + 1} is {float(expected[isp])!r} <= 0 "
                f"under regime {regime.name}",
                isp=isp,
            )
        for t in np.flatnonzero(demands[isp] <= 0):
            notes.append(
                f"uninformed ISP {isp + 1} demand is {float(demands[isp, t])!r} at signal "
                f"{dist.labels[int(t)]!r}; expected demand {float(expected[isp])!r} stays positive"
            )
    for note in notes:
        logger.info(note)

    u_isp, u_cp = _utilities(regime, profile.prices, demands, params, dist)
    return EquilibriumOutcome(
        regime=regime,
        profile=profile,
        demands=demands,
        expected_utility_isp=u_isp,
        expected_utility_cp=u_cp,
        converged=converged,
        iterations=iterations,
        notes=tuple(notes),
    )


# ============================================================================
# Closed forms
# ============================================================================


def _symmetric_denominator(params: MarketParams) -> float:
    return 2.0 * params.alpha - (params.n - 1) * params.beta


def solve_no_info_closed(params: MarketParams, dist: SignalDistribution) -> EquilibriumOutcome:
    """
    Equilibrium when no ISP observes the signal.

    Every ISP charges E[D] / (2 alpha - (n-1) beta). For n = 2 this gives
    E[U_ISP] = alpha E[D]^2 / (2 alpha - beta)^2 and
    E[U_CP] = 2 alpha E[D] p_a / (2 alpha - beta). For n > 2 the symmetric
    formula is confirmed against best-response iteration before returning.

    Raises:
        ValidationError: If alpha <= (n-1) beta
    """
    params.require_valid()
    price = moments(dist).mean / _symmetric_denominator(params)
    prices = np.full((params.n, dist.size), price)
    outcome = build_outcome(NoInfo(), prices, params, dist)
    if params.n > 2:
        _cross_validate(outcome, params, dist)
    return outcome


def solve_full_info_closed(params: MarketParams, dist: SignalDistribution) -> EquilibriumOutcome:
    """
    Equilibrium when every ISP observes the signal.

    Every ISP charges D(theta) / (2 alpha - (n-1) beta) under signal theta,
    so for n = 2 E[U_ISP] = alpha E[D^2] / (2 alpha - beta)^2.

    Raises:
        ValidationError: If alpha <= (n-1) beta
    """
    params.require_valid()
    per_signal = dist.demands / _symmetric_denominator(params)
    prices = np.tile(per_signal, (params.n, 1))
    outcome = build_outcome(FullInfo(), prices, params, dist)
    if params.n > 2:
        _cross_validate(outcome, params, dist)
    return outcome


def collusion_prices(params: MarketParams, dist: SignalDistribution, p_d: float) -> Tuple[np.ndarray, float]:
    """
    Duopoly equilibrium prices when ISP 1 alone is informed and pays p_d.

    Returns:
        (p_1(theta) for every signal, flat p_2)
    """
    a, b = params.alpha, params.beta
    mean = moments(dist).mean
    p1 = dist.demands / (2 * a) + b * mean / (2 * a * (2 * a - b)) + 2 * a * a * p_d / (4 * a * a - b * b)
    p2 = mean / (2 * a - b) + a * b * p_d / (4 * a * a - b * b)
    return p1, float(p2)


def collusion_expected_utilities(
    params: MarketParams, dist: SignalDistribution, p_d: float
) -> Tuple[float, float, float]:
    """
    Closed-form expected equilibrium utilities of ISP 1, ISP 2 and the CP
    as functions of the side payment (n = 2, no feasibility check).

    ISP 1 earns alpha E[(c(theta) - k p_d)^2], ISP 2 earns alpha (q + h p_d)^2,
    and the CP earns 2 alpha q p_a + (alpha q - alpha (k - h) p_a) p_d - alpha k p_d^2,
    with q = E[D]/(2a-b), c(theta) = D/(2a) + b E[D]/(2a(2a-b)),
    k = (2a^2-b^2)/(4a^2-b^2), h = ab/(4a^2-b^2).
    """
    a, b, p_a = params.alpha, params.beta, params.p_a
    mom = moments(dist)
    q = mom.mean / (2 * a - b)
    k = (2 * a * a - b * b) / (4 * a * a - b * b)
    h = a * b / (4 * a * a - b * b)
    u1 = a * (mom.variance / (4 * a * a) + (q - k * p_d) ** 2)
    u2 = a * (q + h * p_d) ** 2
    u_cp = 2 * a * q * p_a + (a * q - a * (k - h) * p_a) * p_d - a * k * p_d * p_d
    return float(u1), float(u2), float(u_cp)


def solve_collusion_closed(
    params: MarketParams, dist: SignalDistribution, p_d: float, informed_isp: int = 0
) -> EquilibriumOutcome:
    """
    Duopoly equilibrium when one ISP is informed and pays p_d per unit demand.

    Args:
        params: Market constants (n must be 2)
        dist: Signal distribution
        p_d: Side payment from the informed ISP to the CP
        informed_isp: Index of the informed ISP

    Raises:
        ValidationError: If n != 2 or alpha <= beta
        InfeasibilityError: If an informed demand or the uninformed expected demand is non-positive
    """
    params.require_duopoly()
    params.require_valid()
    regime = Collusion(informed_isp=informed_isp, side_payment=float(p_d))
    informed_mask(regime, params.n)
    p1, p2 = collusion_prices(params, dist, p_d)
    prices = np.empty((2, dist.size))
    prices[informed_isp] = p1
    prices[1 - informed_isp] = p2
    return build_outcome(regime, prices, params, dist)


def solve_post_bargain_closed(
    params: MarketParams, dist: SignalDistribution, gamma: float, informed_isp: int = 0
) -> EquilibriumOutcome:
    """
    Duopoly equilibrium of the post-bargaining game.

    The informed ISP maximizes gamma E[d(p + p_a)], whose maximizer does not
    depend on gamma: prices equal the collusion prices with p_d = -p_a.
    """
    params.require_duopoly()
    params.require_valid()
    validate_gamma(gamma)
    regime = PostBargain(gamma=float(gamma), informed_isp=informed_isp)
    informed_mask(regime, params.n)
    p1, p2 = collusion_prices(params, dist, -params.p_a)
    prices = np.empty((2, dist.size))
    prices[informed_isp] = p1
    prices[1 - informed_isp] = p2
    return build_outcome(regime, prices, params, dist)


def solve_closed(regime: Regime, params: MarketParams, dist: SignalDistribution) -> EquilibriumOutcome:
    """Dispatch to the closed form matching the regime."""
    if isinstance(regime, NoInfo):
        return solve_no_info_closed(params, dist)
    if isinstance(regime, FullInfo):
        return solve_full_info_closed(params, dist)
    if isinstance(regime, Collusion):
        return solve_collusion_closed(params, dist, regime.side_payment, regime.informed_isp)
    if isinstance(regime, PostBargain):
        return solve_post_bargain_closed(params, dist, regime.gamma, regime.informed_isp)
    raise ValidationError(f"unknown regime {regime!r}")


def feasible_side_payment_interval(params: MarketParams, dist: SignalDistribution) -> Tuple[float, float]:
    """
    Open interval of p_d on which a duopoly collusion equilibrium exists.

    Each equilibrium demand is affine in p_d, so the interval is the
    intersection of one half-line per signal of the informed ISP and one
    half-line for the expected demand of the uninformed ISP, matching the
    acceptance rule of ``build_outcome``.

    Returns:
        (lo, hi), possibly infinite at either end

    Raises:
        InfeasibilityError: If no side payment keeps those demands positive
    """
    params.require_duopoly()
    params.require_valid()

    def demands_at(p_d: float) -> np.ndarray:
        p1, p2 = collusion_prices(params, dist, p_d)
        demands = demand_matrix(np.vstack([p1, np.full(dist.size, p2)]), params, dist)
        return np.append(demands[0], dist.expect(demands[1]))

    base = demands_at(0.0)
    slope = demands_at(1.0) - base
    lo, hi = -np.inf, np.inf
    for d0, s in zip(base, slope):
        if s > 0:
            lo = max(lo, -d0 / s)
        elif s < 0:
            hi = min(hi, -d0 / s)
        elif d0 <= 0:
            lo, hi = np.inf, -np.inf
    if not lo < hi:
        raise InfeasibilityError("no side payment keeps every equilibrium demand positive")
    return float(lo), float(hi)


# ============================================================================
# Best-response iteration
# ============================================================================


def _maximize(objective: Callable[[float], float], lo: float, hi: float, xatol: float) -> float:
    result = minimize_scalar(
        lambda x: -objective(x), bounds=(lo, hi), method="bounded", options={"xatol": xatol}
    )
    return float(result.x)


def _linear_best_response(
    prices: np.ndarray,
    mask: np.ndarray,
    offsets: np.ndarray,
    params: MarketParams,
    dist: SignalDistribution,
    upper: np.ndarray,
) -> np.ndarray:
    a, b = params.alpha, params.beta
    probs = dist.probabilities
    demands = dist.demands
    others = prices.sum(axis=0)[None, :] - prices
    new = np.empty_like(prices)
    for i in range(params.n):
        if mask[i]:
            new[i] = (demands + b * others[i] + a * offsets[i]) / (2 * a)
        else:
            new[i] = (probs @ demands + b * (probs @ others[i]) + a * offsets[i]) / (2 * a)
    return np.clip(new, 0.0, upper[:, None])


def _generic_best_response(
    prices: np.ndarray,
    mask: np.ndarray,
    offsets: np.ndarray,
    oracle: DemandOracle,
    dist: SignalDistribution,
    lower: np.ndarray,
    upper: np.ndarray,
    xatol: float,
) -> np.ndarray:
    probs = dist.probabilities
    n, m = prices.shape
    new = np.empty_like(prices)

    def demand_of(i: int, t: int, x: float) -> float:
        trial = prices[:, t].copy()
        trial[i] = x
        return float(oracle(t, trial)[i])

    for i in range(n):
        if mask[i]:
            for t in range(m):
                new[i, t] = _maximize(
                    lambda x: (x - offsets[i]) * demand_of(i, t, x), lower[i], upper[i], xatol
                )
        else:
            new[i] = _maximize(
                lambda x: (x - offsets[i]) * sum(probs[t] * demand_of(i, t, x) for t in range(m)),
                lower[i],
                upper[i],
                xatol,
            )
    return new


def best_response_iterate(
    regime: Regime,
    params: MarketParams,
    dist: SignalDistribution,
    oracle: Optional[DemandOracle] = None,
    init: Optional[PriceProfile] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    p_max: Optional[float] = None,
    grid=None,
    callback: Optional[Callable[[int, np.ndarray], None]] = None,
) -> EquilibriumOutcome:
    """
    Simultaneous (Jacobi) best-response iteration.

    Informed ISPs best-respond signal by signal; uninformed ISPs maximize
    expected utility with one flat price. Linear demand uses exact best
    responses; generic oracles use bounded 1-D maximization.

    Args:
        regime: Information regime
        params: Market constants (n, p_a; alpha and beta for linear demand)
        dist: Signal distribution
        oracle: Generic demand model, or None for linear demand
        init: Starting profile (default: all prices at their lower bound)
        tol: Stop when the sup-norm price change is below tol
        max_iter: Iteration budget
        p_max: Price cap for linear demand (default 10 E[D] / alpha)
        grid: Price grid for the assumption check of a generic oracle
        callback: Called with (iteration, prices) after every sweep

    Returns:
        Converged EquilibriumOutcome with the iteration count

    Raises:
        PreconditionError: If the structural assumptions fail
        ConvergenceError: If max_iter is exhausted (carries the last profile)
        InfeasibilityError: If the equilibrium has non-positive demand
    """
    tol = settings.SOLVER_TOL if tol is None else tol
    max_iter = settings.SOLVER_MAX_ITER if max_iter is None else max_iter
    if not tol > 0:
        raise ValidationError(f"tol must be > 0, got {tol}")
    if isinstance(regime, PostBargain):
        validate_gamma(regime.gamma)

    if oracle is None:
        report = check_assumptions(params)
        cap = default_price_cap(params, dist) if p_max is None else p_max
        lower, upper = np.zeros(params.n), np.full(params.n, cap)
    else:
        if oracle.n != params.n or oracle.n_signals != dist.size:
            raise ValidationError("demand oracle dimensions do not match the market and distribution")
        report = check_assumptions(params, oracle, default_grid(oracle) if grid is None else grid)
        lower, upper = oracle.bounds()
    if not report.passed:
        names = ", ".join(c.name for c in report.failures())
        raise PreconditionError(f"structural assumptions failed: {names}", report=report)

    mask = informed_mask(regime, params.n)
    offsets = cost_offsets(regime, params)
    if init is None:
        prices = np.repeat(np.asarray(lower, dtype=float)[:, None], dist.size, axis=1)
    else:
        if init.prices.shape != (params.n, dist.size) or init.informed != tuple(bool(f) for f in mask):
            raise ValidationError("initial profile does not match the regime and market dimensions")
        prices = np.array(init.prices, dtype=float)

    xatol = settings.OPTIMIZER_XATOL
    for iteration in range(1, max_iter + 1):
        if oracle is None:
            new = _linear_best_response(prices, mask, offsets, params, dist, upper)
        else:
            new = _generic_best_response(prices, mask, offsets, oracle, dist, lower, upper, xatol)
        change = float(np.max(np.abs(new - prices)))
        prices = new
        if callback is not None:
            callback(iteration, prices.copy())
        if change < tol:
            logger.info("best response converged in %d iterations (%s)", iteration, regime.name)
            return build_outcome(regime, prices, params, dist, oracle, converged=True, iterations=iteration)
        logger.debug("iteration %d: sup-norm change %r", iteration, change)

    raise ConvergenceError(
        f"best response did not converge within {max_iter} iterations",
        last_profile=PriceProfile(prices, tuple(mask)),
        iterations=max_iter,
    )


def confirm_uniqueness(
    regime: Regime,
    params: MarketParams,
    dist: SignalDistribution,
    oracle: Optional[DemandOracle] = None,
    tol: Optional[float] = None,
    rtol: float = 1e-6,
    **kwargs,
) -> Tuple[bool, EquilibriumOutcome, EquilibriumOutcome]:
    """
    Empirical uniqueness check from the extreme starting profiles.

    In a supermodular game iteration from the lowest profile reaches the
    smallest equilibrium and from the highest profile the largest one; the
    equilibrium is unique iff the two coincide.

    Returns:
        (unique, outcome from the bottom, outcome from the top)
    """
    if oracle is None:
        cap = kwargs.pop("p_max", None)
        cap = default_price_cap(params, dist) if cap is None else cap
        top = np.full(params.n, cap)
        kwargs["p_max"] = cap
    else:
        top = oracle.bounds()[1]
    mask = informed_mask(regime, params.n)
    upper_init = PriceProfile(np.repeat(top[:, None], dist.size, axis=1), tuple(mask))

    low = best_response_iterate(regime, params, dist, oracle=oracle, tol=tol, **kwargs)
    high = best_response_iterate(regime, params, dist, oracle=oracle, init=upper_init, tol=tol, **kwargs)
    unique = bool(np.allclose(low.profile.prices, high.profile.prices, rtol=rtol, atol=rtol))
    if not unique:
        logger.warning("iteration from the bottom and top profiles reached different equilibria")
    return unique, low, high


def _cross_validate(outcome: EquilibriumOutcome, params: MarketParams, dist: SignalDistribution) -> None:
    iterated = best_response_iterate(outcome.regime, params, dist)
    if not np.allclose(
        iterated.profile.prices, outcome.profile.prices, rtol=CROSS_VALIDATION_RTOL, atol=0.0
    ):
        raise ConvergenceError(
            f"symmetric closed form for n={params.n} not confirmed by best-response iteration",
            last_profile=iterated.profile,
            iterations=iterated.iterations,
        )
    logger.debug("symmetric closed form for n=%d confirmed in %d iterations", params.n, iterated.iterations)

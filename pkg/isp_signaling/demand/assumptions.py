"""
Structural assumption checks for demand models.

Verifies the monotonicity condition, supermodularity and the dominant
diagonal property that guarantee existence and uniqueness of the price
equilibrium. The linear model is decided analytically; generic oracles are
checked by central finite differences on a caller-supplied price grid.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from isp_signaling.config import settings
from isp_signaling.core.exceptions import ValidationError
from isp_signaling.demand.base import DemandOracle
from isp_signaling.models import MarketParams

logger = logging.getLogger(__name__)

MONOTONICITY = "monotonicity"
SUPERMODULARITY = "supermodularity"
DOMINANT_DIAGONAL = "dominant_diagonal"


@dataclass(frozen=True)
class AssumptionCheck:
    """
    Outcome of one assumption.

    Attributes:
        name: Assumption name
        passed: Whether it holds everywhere checked
        detail: Human-readable summary
        worst_value: Largest violation margin found (> 0 means violated)
        worst_point: (signal index, price vector) where worst_value occurred
    """

    name: str
    passed: bool
    detail: str
    worst_value: Optional[float] = None
    worst_point: Optional[Tuple[int, Tuple[float, ...]]] = None


@dataclass(frozen=True)
class AssumptionReport:
    """Per-assumption pass/fail report."""

    checks: Tuple[AssumptionCheck, ...]
    analytic: bool

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> List[AssumptionCheck]:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> AssumptionCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)


class _Worst:
    """Tracks the largest violation margin seen over the grid."""

    def __init__(self) -> None:
        self.value = -np.inf
        self.point: Optional[Tuple[int, Tuple[float, ...]]] = None
        self.violated = False

    def update(self, value: float, tol: float, theta_idx: int, prices: np.ndarray) -> None:
        if value > tol:
            self.violated = True
        if value > self.value:
            self.value = float(value)
            self.point = (theta_idx, tuple(float(p) for p in prices))


def check_linear(params: MarketParams) -> AssumptionReport:
    """
    Analytic report for linear demand.

    Cross partials of linear demand vanish, so supermodularity always holds;
    the dominant diagonal property reduces to alpha > (n-1) beta.
    """
    gap = params.alpha - (params.n - 1) * params.beta
    checks = (
        AssumptionCheck(
            MONOTONICITY,
            True,
            f"own slope -alpha={-params.alpha}, cross slope beta={params.beta}",
        ),
        AssumptionCheck(SUPERMODULARITY, True, "cross partials of linear demand are identically 0"),
        AssumptionCheck(
            DOMINANT_DIAGONAL,
            gap > 0,
            f"alpha - (n-1)*beta = {gap!r} (must be > 0)",
            worst_value=-gap,
        ),
    )
    return AssumptionReport(checks=checks, analytic=True)


def _steps(prices: np.ndarray, scale: float) -> np.ndarray:
    return scale * np.maximum(1.0, np.abs(prices))


def jacobian(oracle: DemandOracle, theta_idx: int, prices: np.ndarray, step_scale: float) -> np.ndarray:
    """J[i, k] = d d_i / d p_k by central differences."""
    n = prices.size
    h = _steps(prices, step_scale)
    jac = np.empty((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h[k]
        jac[:, k] = (oracle(theta_idx, prices + e) - oracle(theta_idx, prices - e)) / (2.0 * h[k])
    return jac


def own_cross_hessian(oracle: DemandOracle, theta_idx: int, prices: np.ndarray, step_scale: float) -> np.ndarray:
    """H[i, j] = d^2 d_i / (d p_i d p_j) by central differences."""
    n = prices.size
    h = _steps(prices, step_scale)
    base = oracle(theta_idx, prices)
    hess = np.empty((n, n))
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        hess[i, i] = (
            oracle(theta_idx, prices + ei)[i] - 2.0 * base[i] + oracle(theta_idx, prices - ei)[i]
        ) / h[i] ** 2
        for j in range(n):
            if j == i:
                continue
            ej = np.zeros(n)
            ej[j] = h[j]
            hess[i, j] = (
                oracle(theta_idx, prices + ei + ej)[i]
                - oracle(theta_idx, prices + ei - ej)[i]
                - oracle(theta_idx, prices - ei + ej)[i]
                + oracle(theta_idx, prices - ei - ej)[i]
            ) / (4.0 * h[i] * h[j])
    return hess


def default_grid(oracle: DemandOracle, levels: Sequence[float] = (0.25, 0.5, 0.75)) -> List[np.ndarray]:
    """Interior grid: every combination of the given fractions of each price box."""
    lower, upper = oracle.bounds()
    axes = [[lo + f * (hi - lo) for f in levels] for lo, hi in zip(lower, upper)]
    return [np.array(point) for point in itertools.product(*axes)]


def check_oracle(
    oracle: DemandOracle,
    grid: Iterable[Sequence[float]],
    log_scale: Optional[bool] = None,
    step_scale: Optional[float] = None,
    second_step_scale: Optional[float] = None,
    tol: Optional[float] = None,
) -> AssumptionReport:
    """
    Finite-difference report for a generic demand oracle.

    Args:
        oracle: Demand model
        grid: Price vectors inside the oracle's declared domain
        log_scale: Check supermodularity of log-demand (defaults to the
            oracle's ``log_supermodular`` flag)
        step_scale: First-derivative step factor (h = scale * max(1, |p|))
        second_step_scale: Step factor for mixed second derivatives
        tol: Relative tolerance on sign conditions

    Returns:
        AssumptionReport with the worst violating grid point per assumption

    Raises:
        ValidationError: If the grid is empty or leaves the declared domain
    """
    points = [np.asarray(p, dtype=float) for p in grid]
    if not points:
        raise ValidationError("price grid must not be empty for a generic demand oracle")
    for p in points:
        if p.size != oracle.n or not oracle.contains(p):
            raise ValidationError(f"grid point {tuple(p)} lies outside the oracle's domain")

    log_scale = oracle.log_supermodular if log_scale is None else log_scale
    h1 = settings.FD_STEP_SCALE if step_scale is None else step_scale
    h2 = settings.FD2_STEP_SCALE if second_step_scale is None else second_step_scale
    tol = settings.ASSUMPTION_TOL if tol is None else tol

    mono, sup, diag = _Worst(), _Worst(), _Worst()
    skipped = 0
    n = oracle.n
    for p in points:
        cache = {}
        for t in range(oracle.n_signals):
            d = oracle(t, p)
            jac = jacobian(oracle, t, p, h1)
            hess = own_cross_hessian(oracle, t, p, h2)
            cache[t] = (d, jac, hess)

            for i in range(n):
                scale = max(1.0, abs(jac[i, i]))
                mono.update(jac[i, i] / scale, 0.0, t, p)
                for j in range(n):
                    if j != i:
                        mono.update(-jac[i, j] / scale, 0.0, t, p)

                for j in range(n):
                    if j == i:
                        continue
                    if log_scale:
                        if d[i] <= 0:
                            skipped += 1
                            continue
                        cross = hess[i, j] / d[i] - jac[i, i] * jac[i, j] / d[i] ** 2
                        ref = abs(hess[i, j] / d[i]) + abs(jac[i, i] * jac[i, j]) / d[i] ** 2
                    else:
                        cross = hess[i, j]
                        ref = abs(hess[i, i])
                    sup.update(-cross, tol * max(1.0, ref), t, p)

        for t, u in itertools.product(range(oracle.n_signals), repeat=2):
            d_t, jac_t, _ = cache[t]
            _, jac_u, hess_u = cache[u]
            for i in range(n):
                terms = d_t[i] * hess_u[i, :] - jac_t[i, i] * jac_u[i, :]
                diag.update(float(terms.sum()), tol * max(1.0, float(np.abs(terms).sum())), t, p)

    if skipped:
        logger.debug("log-supermodularity skipped %d non-positive demand evaluations", skipped)

    def _check(name: str, worst: _Worst, passed_text: str) -> AssumptionCheck:
        if worst.violated:
            return AssumptionCheck(
                name, False, f"violated, worst margin {worst.value!r}", worst.value, worst.point
            )
        return AssumptionCheck(name, True, passed_text, worst.value, None)

    checks = (
        _check(MONOTONICITY, mono, "own slopes negative and cross slopes positive on the grid"),
        _check(
            SUPERMODULARITY,
            sup,
            "log-demand cross partials non-negative on the grid"
            if log_scale
            else "demand cross partials non-negative on the grid",
        ),
        _check(DOMINANT_DIAGONAL, diag, "dominant diagonal holds on the grid"),
    )
    return AssumptionReport(checks=checks, analytic=False)


def check_assumptions(
    params: MarketParams,
    oracle: Optional[DemandOracle] = None,
    grid: Optional[Iterable[Sequence[float]]] = None,
    **kwargs,
) -> AssumptionReport:
    """
    Check the structural assumptions of the price game.

    Args:
        params: Market constants
        oracle: Generic demand model, or None for linear demand
        grid: Price grid for generic oracles (ignored for linear demand)
        **kwargs: Forwarded to check_oracle

    Returns:
        AssumptionReport
    """
    if oracle is None:
        report = check_linear(params)
    else:
        if grid is None:
            raise ValidationError("a price grid is required to check a generic demand oracle")
        report = check_oracle(oracle, grid, **kwargs)
    for failure in report.failures():
        logger.info("assumption %s failed: %s", failure.name, failure.detail)
    return report

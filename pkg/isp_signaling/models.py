"""
Domain data model for the ISP-CP signaling game.

This module defines the signal distribution, market constants, information
regimes, price profiles and equilibrium records shared by every solver.
All records are immutable; numeric vectors are numpy arrays.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from isp_signaling.core.exceptions import ValidationError, Violation

PROBABILITY_TOL = 1e-12


@dataclass(frozen=True)
class SignalOutcome:
    """
    One realization of the CP's private signal.

    Attributes:
        label: Unique name of the signal (e.g. "H", "M", "L")
        probability: P(theta), in [0, 1]
        baseline_demand: D(theta) > 0, demand per ISP when access is free
    """

    label: str
    probability: float
    baseline_demand: float


@dataclass(frozen=True)
class SignalDistribution:
    """
    Finite signal space with probabilities and baseline demands.

    Attributes:
        outcomes: Ordered signal outcomes; order fixes the signal index
    """

    outcomes: Tuple[SignalOutcome, ...]

    def __post_init__(self) -> None:
        """Validate the distribution and report every violation at once."""
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        violations = validate_distribution(self.outcomes)
        if violations:
            raise ValidationError("Invalid signal distribution", violations)

    @classmethod
    def from_values(
        cls,
        demands: Sequence[float],
        probabilities: Sequence[float],
        labels: Optional[Sequence[str]] = None,
    ) -> "SignalDistribution":
        """Build a distribution from parallel demand/probability lists."""
        if labels is None:
            labels = [f"s{k}" for k in range(len(demands))]
        if not (len(labels) == len(demands) == len(probabilities)):
            raise ValidationError("labels, demands and probabilities must have equal length")
        return cls(
            tuple(
                SignalOutcome(str(lbl), float(p), float(d))
                for lbl, d, p in zip(labels, demands, probabilities)
            )
        )

    @property
    def size(self) -> int:
        return len(self.outcomes)

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(o.label for o in self.outcomes)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([o.probability for o in self.outcomes], dtype=float)

    @property
    def demands(self) -> np.ndarray:
        return np.array([o.baseline_demand for o in self.outcomes], dtype=float)

    def expect(self, values: np.ndarray) -> float:
        """Expectation over signals of a per-signal vector."""
        return float(np.dot(self.probabilities, values))

    def scaled(self, factor: float) -> "SignalDistribution":
        """Same probabilities with every baseline demand multiplied by factor."""
        return SignalDistribution(
            tuple(
                SignalOutcome(o.label, o.probability, o.baseline_demand * factor)
                for o in self.outcomes
            )
        )


def validate_distribution(outcomes: Sequence[SignalOutcome]) -> List[Violation]:
    """
    Check the distribution invariants.

    Args:
        outcomes: Candidate outcomes

    Returns:
        List of violations (empty if valid)
    """
    violations: List[Violation] = []
    if not outcomes:
        return [Violation("distribution", "at least one outcome is required")]

    seen = set()
    for k, o in enumerate(outcomes):
        if not 0.0 <= o.probability <= 1.0:
            violations.append(
                Violation(f"distribution[{k}].probability", f"{o.probability} not in [0, 1]")
            )
        if not o.baseline_demand > 0:
            violations.append(
                Violation(f"distribution[{k}].baseline_demand", f"{o.baseline_demand} must be > 0")
            )
        if o.label in seen:
            violations.append(Violation(f"distribution[{k}].label", f"duplicate label {o.label!r}"))
        seen.add(o.label)

    total = math.fsum(o.probability for o in outcomes)
    if abs(total - 1.0) > PROBABILITY_TOL:
        violations.append(Violation("distribution", f"probabilities sum to {total!r}, expected 1"))
    return violations


@dataclass(frozen=True)
class MarketParams:
    """
    Market constants of the linear price-competition model.

    Attributes:
        alpha: Own-price sensitivity (> 0)
        beta: Cross-price sensitivity (> 0)
        p_a: Advertising revenue per unit demand earned by the CP (>= 0)
        n: Number of ISPs (>= 2)

    Field domains are enforced on construction. The dominant diagonal
    condition alpha > (n-1) beta is exposed through ``dominant_diagonal``
    and enforced by the solvers, so that assumption checks can still
    describe a failing market.
    """

    alpha: float
    beta: float
    p_a: float = 0.0
    n: int = 2

    def __post_init__(self) -> None:
        violations = []
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            violations.append(Violation("market.n", f"{self.n} must be an integer >= 2"))
        if not self.alpha > 0:
            violations.append(Violation("market.alpha", f"{self.alpha} must be > 0"))
        if not self.beta > 0:
            violations.append(Violation("market.beta", f"{self.beta} must be > 0"))
        if not self.p_a >= 0:
            violations.append(Violation("market.p_a", f"{self.p_a} must be >= 0"))
        if violations:
            raise ValidationError("Invalid market parameters", violations)

    @property
    def dominant_diagonal(self) -> bool:
        """True iff alpha > (n-1) beta."""
        return self.alpha > (self.n - 1) * self.beta

    @property
    def tau(self) -> float:
        """Cross-to-own sensitivity ratio beta / alpha."""
        return self.beta / self.alpha

    def require_valid(self) -> None:
        """Raise ValidationError unless alpha > (n-1) beta."""
        if not self.dominant_diagonal:
            raise ValidationError(
                "Invalid market parameters",
                [
                    Violation(
                        "market",
                        f"alpha > (n-1)*beta required, got alpha={self.alpha}, "
                        f"(n-1)*beta={(self.n - 1) * self.beta}",
                    )
                ],
            )

    def require_duopoly(self) -> None:
        """Raise ValidationError unless n == 2."""
        if self.n != 2:
            raise ValidationError(f"closed form requires n=2, got n={self.n}")


@dataclass(frozen=True)
class Moments:
    """First and second moments of D(theta)."""

    mean: float
    second_moment: float
    variance: float


# ============================================================================
# Information regimes
# ============================================================================


@dataclass(frozen=True)
class NoInfo:
    """No ISP observes the signal."""

    name = "no_info"


@dataclass(frozen=True)
class FullInfo:
    """Every ISP observes the signal."""

    name = "full_info"


@dataclass(frozen=True)
class Collusion:
    """
    The CP reveals the signal to one ISP only.

    Attributes:
        informed_isp: Zero-based index of the informed ISP
        side_payment: p_d, paid by the informed ISP to the CP per unit demand
    """

    informed_isp: int = 0
    side_payment: float = 0.0
    name = "collusion"


@dataclass(frozen=True)
class PostBargain:
    """
    Modified-utility game of post-bargaining: the informed ISP anticipates
    receiving a gamma share of the pooled revenue E[d(p + p_a)].
    """

    gamma: float
    informed_isp: int = 0
    name = "post_bargain"


Regime = Union[NoInfo, FullInfo, Collusion, PostBargain]


def informed_mask(regime: Regime, n: int) -> np.ndarray:
    """
    Boolean vector marking which ISPs observe the signal.

    Raises:
        ValidationError: If the informed ISP index is out of range
    """
    if isinstance(regime, NoInfo):
        return np.zeros(n, dtype=bool)
    if isinstance(regime, FullInfo):
        return np.ones(n, dtype=bool)
    if isinstance(regime, (Collusion, PostBargain)):
        if not 0 <= regime.informed_isp < n:
            raise ValidationError(f"informed_isp {regime.informed_isp} out of range for n={n}")
        mask = np.zeros(n, dtype=bool)
        mask[regime.informed_isp] = True
        return mask
    raise ValidationError(f"unknown regime {regime!r}")


def cost_offsets(regime: Regime, params: MarketParams) -> np.ndarray:
    """
    Per-ISP margin offsets c_i: each ISP's pricing objective is (p_i - c_i) d_i.

    The colluding ISP pays p_d per unit; in the post-bargaining game its
    objective is proportional to (p_1 + p_a) d_1, i.e. c_1 = -p_a.
    """
    offsets = np.zeros(params.n)
    if isinstance(regime, Collusion):
        offsets[regime.informed_isp] = regime.side_payment
    elif isinstance(regime, PostBargain):
        offsets[regime.informed_isp] = -params.p_a
    return offsets


# ============================================================================
# Prices and outcomes
# ============================================================================


@dataclass(frozen=True, eq=False)
class PriceProfile:
    """
    Prices of every ISP for every signal.

    Attributes:
        prices: Array of shape (n, m); rows of uninformed ISPs are constant
        informed: Per-ISP flag, True when the ISP prices per signal
    """

    prices: np.ndarray
    informed: Tuple[bool, ...]

    def __post_init__(self) -> None:
        prices = np.array(self.prices, dtype=float)
        if prices.ndim != 2 or prices.shape[0] != len(self.informed):
            raise ValidationError("prices must have shape (n_isps, n_signals)")
        for i, flag in enumerate(self.informed):
            if not flag and np.ptp(prices[i]) != 0.0:
                raise ValidationError(f"uninformed ISP {i} must charge a single flat price")
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "informed", tuple(bool(f) for f in self.informed))

    @classmethod
    def from_flat(cls, flat: Iterable[float], n_signals: int, informed: Sequence[bool]) -> "PriceProfile":
        """Profile in which every ISP charges the given price for every signal."""
        flat = np.asarray(list(flat), dtype=float)
        return cls(np.repeat(flat[:, None], n_signals, axis=1), tuple(informed))

    @property
    def n_isps(self) -> int:
        return self.prices.shape[0]

    def flat_price(self, isp: int) -> float:
        """Scalar price of an uninformed ISP."""
        if self.informed[isp]:
            raise ValidationError(f"ISP {isp} is informed and has no single flat price")
        return float(self.prices[isp, 0])

    def price(self, isp: int, theta_idx: int) -> float:
        return float(self.prices[isp, theta_idx])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PriceProfile):
            return NotImplemented
        return self.informed == other.informed and np.array_equal(self.prices, other.prices)


@dataclass(frozen=True, eq=False)
class EquilibriumOutcome:
    """
    Equilibrium prices, demands and expected utilities.

    Attributes:
        regime: Information regime solved
        profile: Equilibrium prices
        demands: Array (n, m) of per-signal demands d_i(theta)
        expected_utility_isp: Expected utility of each ISP
        expected_utility_cp: Expected utility of the CP
        converged: False only for iterative solves that stopped early
        iterations: Iterations used (0 for closed forms)
        notes: Non-fatal observations, e.g. an uninformed ISP whose
            demand is negative under some signal but positive in expectation
    """

    regime: Regime
    profile: PriceProfile
    demands: np.ndarray
    expected_utility_isp: Tuple[float, ...]
    expected_utility_cp: float
    converged: bool = True
    iterations: int = 0
    notes: Tuple[str, ...] = field(default_factory=tuple)

    def expected_demand(self, isp: int, dist: SignalDistribution) -> float:
        return dist.expect(self.demands[isp])


@dataclass(frozen=True)
class IncentiveRegion:
    """
    Side-payment thresholds and the beneficial-collusion regions.

    Intervals are (lo, hi) tuples, or None when empty.
    """

    isp_threshold: float
    cp_threshold: float
    dominance_threshold: float
    region_a: Optional[Tuple[float, float]]
    region_b: Optional[Tuple[float, float]]
    notes: Tuple[str, ...] = field(default_factory=tuple)


class BargainingMode(str, Enum):
    """When the side payment is fixed relative to price competition."""

    PRE = "pre"
    POST = "post"


@dataclass(frozen=True)
class BargainingConfig:
    """
    Bargaining power and mechanism.

    Attributes:
        gamma: Bargaining power of the informed ISP, in (0, 1)
        mode: Pre- or post-bargaining
    """

    gamma: float
    mode: BargainingMode = BargainingMode.PRE

    def __post_init__(self) -> None:
        validate_gamma(self.gamma)
        object.__setattr__(self, "mode", BargainingMode(self.mode))


def validate_gamma(gamma: float) -> None:
    """Raise ValidationError unless 0 < gamma < 1."""
    if not 0.0 < gamma < 1.0:
        raise ValidationError(
            "Invalid bargaining power", [Violation("bargaining.gamma", f"{gamma} not in (0, 1)")]
        )


@dataclass(frozen=True, eq=False)
class BargainOutcome:
    """
    Side payment chosen by the arbitrator and the resulting equilibrium.

    Attributes:
        mode: Mechanism used
        gamma: Bargaining power of the informed ISP
        side_payment: p_d set by the arbitrator
        equilibrium: Price equilibrium at that side payment
        isp_share: Expected utility of the informed ISP
        cp_share: Expected CP revenue from the informed ISP's traffic
        regulator_log_utility: gamma log(isp_share) + (1-gamma) log(cp_share)
    """

    mode: BargainingMode
    gamma: float
    side_payment: float
    equilibrium: EquilibriumOutcome
    isp_share: float
    cp_share: float
    regulator_log_utility: float


@dataclass(frozen=True)
class PopbResult:
    """
    Price of Partial Bargaining of the pre-bargaining mechanism.

    Attributes:
        p_d_social: Side payment maximizing the sum of equilibrium utilities
        p_d_nash: Side payment from the symmetric Nash product
        social_utility_at_social: Social utility at p_d_social
        social_utility_at_nash: Social utility at p_d_nash
        popb: Ratio of the two social utilities
        vertex_feasible: Whether p_d_social keeps every demand positive
    """

    p_d_social: float
    p_d_nash: float
    social_utility_at_social: float
    social_utility_at_nash: float
    popb: float
    vertex_feasible: bool = True

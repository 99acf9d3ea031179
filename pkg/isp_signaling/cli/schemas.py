"""
Scenario file schemas.

Pydantic models for the YAML scenario document. Validation collects every
violated field in one pass; the loader maps each error location back to a
line of the source file.
"""

import math
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from isp_signaling.models import PROBABILITY_TOL, BargainingMode


class MarketSchema(BaseModel):
    """Market constants."""

    model_config = ConfigDict(extra="forbid")

    alpha: float = Field(gt=0)
    beta: float = Field(gt=0)
    p_a: float = Field(default=0.0, ge=0)
    n: int = Field(default=2, ge=2)

    @model_validator(mode="after")
    def check_dominant_diagonal(self) -> "MarketSchema":
        """
        Require alpha > (n-1) beta.

        Raises:
            ValueError: If own-price effects do not dominate
        """
        if not self.alpha > (self.n - 1) * self.beta:
            raise ValueError(
                f"alpha > (n-1)*beta required, got alpha={self.alpha}, "
                f"(n-1)*beta={(self.n - 1) * self.beta}"
            )
        return self


class OutcomeSchema(BaseModel):
    """One signal outcome."""

    model_config = ConfigDict(extra="forbid")

    label: str = Field(min_length=1)
    probability: float = Field(ge=0, le=1)
    demand: float = Field(gt=0)


class RegimeSchema(BaseModel):
    """Information regime to solve."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["no_info", "full_info", "collusion", "post_bargain"] = "no_info"
    informed_isp: int = Field(default=0, ge=0)
    side_payment: float = 0.0
    gamma: Optional[float] = Field(default=None, gt=0, lt=1)

    @model_validator(mode="after")
    def check_gamma(self) -> "RegimeSchema":
        if self.kind == "post_bargain" and self.gamma is None:
            raise ValueError("post_bargain regime requires gamma")
        return self


class BargainingSchema(BaseModel):
    """Bargaining power and mechanism."""

    model_config = ConfigDict(extra="forbid")

    gamma: float = Field(gt=0, lt=1)
    mode: BargainingMode = BargainingMode.PRE


class SweepSchema(BaseModel):
    """Evenly spaced grid over one variable."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    variable: Literal["p_d", "gamma", "tau"]
    start: float = Field(alias="from")
    stop: float = Field(alias="to")
    steps: int = Field(ge=2)

    @model_validator(mode="after")
    def check_order(self) -> "SweepSchema":
        if not self.start < self.stop:
            raise ValueError(f"from ({self.start}) must be < to ({self.stop})")
        return self


class ScenarioSchema(BaseModel):
    """
    Complete scenario document.

    Example:
        market: {alpha: 2, beta: 1, p_a: 5}
        distribution:
          - {label: H, probability: 0.1, demand: 200}
        regime: {kind: collusion, side_payment: 5}
    """

    model_config = ConfigDict(extra="forbid")

    market: MarketSchema
    distribution: List[OutcomeSchema] = Field(min_length=1)
    regime: RegimeSchema = Field(default_factory=RegimeSchema)
    bargaining: Optional[BargainingSchema] = None
    sweep: Optional[SweepSchema] = None

    @field_validator("distribution")
    @classmethod
    def check_distribution(cls, outcomes: List[OutcomeSchema]) -> List[OutcomeSchema]:
        """
        Probabilities must sum to 1 and labels must be unique.

        Raises:
            ValueError: Listing every problem found
        """
        problems = []
        total = math.fsum(o.probability for o in outcomes)
        if abs(total - 1.0) > PROBABILITY_TOL:
            problems.append(f"probabilities sum to {total!r}, expected 1")
        labels = [o.label for o in outcomes]
        duplicates = sorted({lbl for lbl in labels if labels.count(lbl) > 1})
        if duplicates:
            problems.append(f"duplicate labels {duplicates}")
        if problems:
            raise ValueError("; ".join(problems))
        return outcomes

    @model_validator(mode="after")
    def check_informed_isp(self) -> "ScenarioSchema":
        if self.regime.kind in ("collusion", "post_bargain") and self.regime.informed_isp >= self.market.n:
            raise ValueError(f"regime.informed_isp {self.regime.informed_isp} out of range for n={self.market.n}")
        return self

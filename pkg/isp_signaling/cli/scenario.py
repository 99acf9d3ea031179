"""
Scenario loading and serialization.

A scenario is a YAML document with market, distribution, regime, bargaining
and sweep sections. Loading validates the whole document and reports every
violation with its field path and source line.
"""

import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pydantic
import yaml

from isp_signaling.cli.schemas import ScenarioSchema
from isp_signaling.core.exceptions import ScenarioIOError, ValidationError, Violation
from isp_signaling.models import (
    BargainingConfig,
    Collusion,
    FullInfo,
    MarketParams,
    NoInfo,
    PostBargain,
    Regime,
    SignalDistribution,
    SignalOutcome,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Sweep:
    """Evenly spaced grid of ``steps`` points from ``start`` to ``stop``."""

    variable: str
    start: float
    stop: float
    steps: int

    def grid(self) -> List[float]:
        return [float(x) for x in np.linspace(self.start, self.stop, self.steps)]


@dataclass(frozen=True)
class Scenario:
    """
    Validated scenario.

    Attributes:
        market: Market constants
        distribution: Signal distribution
        regime: Regime to solve (default NoInfo)
        bargaining: Optional bargaining configuration
        sweep: Optional sweep grid
        source_hash: sha256 of the file the scenario was read from
    """

    market: MarketParams
    distribution: SignalDistribution
    regime: Regime = field(default_factory=NoInfo)
    bargaining: Optional[BargainingConfig] = None
    sweep: Optional[Sweep] = None
    source_hash: str = field(default="", compare=False)


def scenario_hash(text: Union[str, bytes]) -> str:
    """sha256 hex digest of the scenario source."""
    data = text.encode("utf-8") if isinstance(text, str) else text
    return hashlib.sha256(data).hexdigest()


# ============================================================================
# Line lookup
# ============================================================================


def _node_at(root: Optional[yaml.Node], loc: Tuple[Any, ...]) -> Optional[yaml.Node]:
    """Deepest node of the composed document along an error location."""
    node = root
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            child = next((v for k, v in node.value if k.value == str(key)), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            child = node.value[key]
        else:
            child = None
        if child is None:
            break
        node = child
    return node


def _line_of(root: Optional[yaml.Node], loc: Tuple[Any, ...]) -> Optional[int]:
    node = _node_at(root, loc)
    return None if node is None else node.start_mark.line + 1


def _violations(error: pydantic.ValidationError, root: Optional[yaml.Node]) -> List[Violation]:
    violations = []
    for item in error.errors():
        loc = tuple(item["loc"])
        path = ".".join(str(part) for part in loc) or "<document>"
        message = item["msg"]
        if message.startswith("Value error, "):
            message = message[len("Value error, "):]
        violations.append(Violation(path, message, _line_of(root, loc)))
    return violations


# ============================================================================
# Conversion
# ============================================================================


def _regime_from(schema: ScenarioSchema) -> Regime:
    regime = schema.regime
    if regime.kind == "full_info":
        return FullInfo()
    if regime.kind == "collusion":
        return Collusion(informed_isp=regime.informed_isp, side_payment=regime.side_payment)
    if regime.kind == "post_bargain":
        return PostBargain(gamma=regime.gamma, informed_isp=regime.informed_isp)
    return NoInfo()


def scenario_from_schema(schema: ScenarioSchema, source_hash: str = "") -> Scenario:
    """Build domain objects from a validated schema."""
    market = MarketParams(
        alpha=schema.market.alpha, beta=schema.market.beta, p_a=schema.market.p_a, n=schema.market.n
    )
    distribution = SignalDistribution(
        tuple(SignalOutcome(o.label, o.probability, o.demand) for o in schema.distribution)
    )
    bargaining = None
    if schema.bargaining is not None:
        bargaining = BargainingConfig(gamma=schema.bargaining.gamma, mode=schema.bargaining.mode)
    sweep = None
    if schema.sweep is not None:
        sweep = Sweep(schema.sweep.variable, schema.sweep.start, schema.sweep.stop, schema.sweep.steps)
    return Scenario(
        market=market,
        distribution=distribution,
        regime=_regime_from(schema),
        bargaining=bargaining,
        sweep=sweep,
        source_hash=source_hash,
    )


def loads_scenario(text: str) -> Scenario:
    """
    Parse and validate scenario text.

    Raises:
        ValidationError: On YAML syntax errors (with line) or schema violations
    """
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(e, "problem", None) or str(e)
        raise ValidationError("Scenario parse error", [Violation("<document>", problem, line)]) from e

    if not isinstance(data, dict):
        raise ValidationError(
            "Invalid scenario",
            [Violation("<document>", "top level must be a mapping", 1 if root is None else _line_of(root, ()))],
        )

    try:
        schema = ScenarioSchema.model_validate(data)
    except pydantic.ValidationError as e:
        raise ValidationError("Invalid scenario", _violations(e, root)) from e
    return scenario_from_schema(schema, scenario_hash(text))


def parse_scenario(path: Union[str, Path]) -> Scenario:
    """
    Read and validate a scenario file.

    Args:
        path: YAML scenario file

    Returns:
        Validated Scenario carrying the sha256 of the file

    Raises:
        ScenarioIOError: If the file cannot be read
        ValidationError: Listing every violation with field path and line
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ScenarioIOError(f"cannot read scenario: {e}", path=str(path)) from e
    scenario = loads_scenario(text)
    logger.info("loaded scenario %s (sha256 %s)", path, scenario.source_hash)
    return scenario


def _regime_dict(regime: Regime) -> Dict[str, Any]:
    if isinstance(regime, Collusion):
        return {"kind": regime.name, "informed_isp": regime.informed_isp, "side_payment": regime.side_payment}
    if isinstance(regime, PostBargain):
        return {"kind": regime.name, "informed_isp": regime.informed_isp, "gamma": regime.gamma}
    return {"kind": regime.name}


def dump_scenario(scenario: Scenario, path: Optional[Union[str, Path]] = None) -> str:
    """
    Serialize a scenario to YAML; loads_scenario(dump_scenario(s)) == s.

    Args:
        scenario: Scenario to serialize
        path: Optional file to write

    Returns:
        YAML text

    Raises:
        ScenarioIOError: If the file cannot be written
    """
    market = scenario.market
    document: Dict[str, Any] = {
        "market": {"alpha": market.alpha, "beta": market.beta, "p_a": market.p_a, "n": int(market.n)},
        "distribution": [
            {"label": o.label, "probability": o.probability, "demand": o.baseline_demand}
            for o in scenario.distribution.outcomes
        ],
        "regime": _regime_dict(scenario.regime),
    }
    if scenario.bargaining is not None:
        document["bargaining"] = {"gamma": scenario.bargaining.gamma, "mode": scenario.bargaining.mode.value}
    if scenario.sweep is not None:
        sweep = scenario.sweep
        document["sweep"] = {"variable": sweep.variable, "from": sweep.start, "to": sweep.stop, "steps": sweep.steps}

    text = yaml.safe_dump(document, sort_keys=False, default_flow_style=False)
    if path is not None:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as e:
            raise ScenarioIOError(f"cannot write scenario: {e}", path=str(path)) from e
    return text

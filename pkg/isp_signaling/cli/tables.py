"""
CSV tables emitted by the command-line front end.

Every table starts with one comment line carrying the scenario hash and any
notes, followed by a header row. Floats use the shortest round-trip
representation so identical inputs give byte-identical files.
"""

import csv
import io
import math
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Tuple, Union

from isp_signaling.core.exceptions import ScenarioIOError
from isp_signaling.demand import AssumptionReport
from isp_signaling.models import BargainOutcome, EquilibriumOutcome, IncentiveRegion, SignalDistribution

SWEEP_PD_COLUMNS = ("p_d", "u_isp1", "u_isp2", "u_cp", "in_region_a", "in_region_b")
SWEEP_GAMMA_COLUMNS = ("gamma", "pre_u_isp1", "pre_u_cp", "pre_pd", "post_u_isp1", "post_u_cp", "post_pd")
POPB_COLUMNS = ("tau", "beta", "popb", "pd_social", "pd_nash")
THRESHOLD_COLUMNS = ("name", "value")
CHECK_COLUMNS = ("assumption", "passed", "detail")
BARGAIN_COLUMNS = (
    "mode",
    "gamma",
    "side_payment",
    "isp_share",
    "cp_share",
    "regulator_log_utility",
    "u_isp1",
    "u_isp2",
    "u_cp",
)


class Table:
    """Header, rows and preamble notes of one CSV document."""

    def __init__(self, columns: Sequence[str], rows: Iterable[Sequence[Any]] = (), notes: Sequence[str] = ()):
        self.columns = tuple(columns)
        self.rows: List[Tuple[Any, ...]] = [tuple(r) for r in rows]
        self.notes = list(notes)

    def __len__(self) -> int:
        return len(self.rows)


def format_value(value: Any) -> str:
    """Render one CSV cell."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(float(value))
    return str(value)


def render(table: Table, source_hash: str) -> str:
    """CSV text for a table, preamble first."""
    buffer = io.StringIO()
    notes = "; ".join(table.notes)
    preamble = f"# scenario_sha256={source_hash}"
    if notes:
        preamble += f"; {notes}"
    buffer.write(preamble.replace("\n", " ") + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(v) for v in row])
    return buffer.getvalue()


def write_table(table: Table, source_hash: str, path: Union[str, Path]) -> None:
    """
    Write a table to disk.

    Raises:
        ScenarioIOError: If the file cannot be written
    """
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(render(table, source_hash))
    except OSError as e:
        raise ScenarioIOError(f"cannot write output: {e}", path=str(path)) from e


# ============================================================================
# Builders
# ============================================================================


def solve_table(outcome: EquilibriumOutcome, dist: SignalDistribution) -> Table:
    """
    Single-row table: regime, convergence, utilities, then price and demand
    per ISP and signal (``price_isp1_H``, ``demand_isp1_H`` ...).
    """
    n = outcome.profile.n_isps
    columns = ["regime", "converged", "iterations", "u_cp"]
    columns += [f"u_isp{i + 1}" for i in range(n)]
    row: List[Any] = [outcome.regime.name, outcome.converged, outcome.iterations, outcome.expected_utility_cp]
    row += list(outcome.expected_utility_isp)
    for kind, matrix in (("price", outcome.profile.prices), ("demand", outcome.demands)):
        for i in range(n):
            for t, label in enumerate(dist.labels):
                columns.append(f"{kind}_isp{i + 1}_{label}")
                row.append(float(matrix[i, t]))
    return Table(columns, [row], outcome.notes)


def bargain_table(outcome: BargainOutcome) -> Table:
    """Single-row table of the bargained side payment, the two shares and the equilibrium utilities."""
    equilibrium = outcome.equilibrium
    row = [
        outcome.mode.value,
        outcome.gamma,
        outcome.side_payment,
        outcome.isp_share,
        outcome.cp_share,
        outcome.regulator_log_utility,
        equilibrium.expected_utility_isp[0],
        equilibrium.expected_utility_isp[1],
        equilibrium.expected_utility_cp,
    ]
    return Table(BARGAIN_COLUMNS, [row], equilibrium.notes)


def sweep_pd_table(rows) -> Table:
    notes = []
    infeasible = [r.p_d for r in rows if not r.feasible]
    if infeasible:
        notes.append(f"infeasible side payments (non-positive demand): {len(infeasible)}")
    return Table(
        SWEEP_PD_COLUMNS,
        [(r.p_d, r.u_isp1, r.u_isp2, r.u_cp, r.in_region_a, r.in_region_b) for r in rows],
        notes,
    )


def sweep_gamma_table(comparison) -> Table:
    notes = []
    for c in comparison.crossovers:
        below = "pre" if c.prefers_pre_below else "post"
        notes.append(f"{c.player} crossover gamma={c.gamma!r} prefers {below} below")
    failed = [r.gamma for r in comparison.rows if r.error]
    if failed:
        notes.append(f"failed gamma values: {len(failed)}")
    return Table(
        SWEEP_GAMMA_COLUMNS,
        [
            (r.gamma, r.pre_u_isp1, r.pre_u_cp, r.pre_pd, r.post_u_isp1, r.post_u_cp, r.post_pd)
            for r in comparison.rows
        ],
        notes,
    )


def popb_table(rows, notes: Sequence[str] = ()) -> Table:
    notes = list(notes)
    outside = [r.tau for r in rows if not r.vertex_feasible and r.error is None]
    if outside:
        notes.append(f"social optimum outside the feasible interval at tau={outside}")
    failed = [r.tau for r in rows if r.error]
    if failed:
        notes.append(f"failed tau values: {failed}")
    return Table(POPB_COLUMNS, [(r.tau, r.beta, r.popb, r.pd_social, r.pd_nash) for r in rows], notes)


def _bounds(interval: Optional[Tuple[float, float]]) -> Tuple[float, float]:
    return (math.nan, math.nan) if interval is None else interval


def thresholds_table(region: IncentiveRegion) -> Table:
    a_lo, a_hi = _bounds(region.region_a)
    b_lo, b_hi = _bounds(region.region_b)
    rows = [
        ("isp_threshold", region.isp_threshold),
        ("cp_threshold", region.cp_threshold),
        ("dominance_threshold", region.dominance_threshold),
        ("region_a_lo", a_lo),
        ("region_a_hi", a_hi),
        ("region_b_lo", b_lo),
        ("region_b_hi", b_hi),
    ]
    return Table(THRESHOLD_COLUMNS, rows, region.notes)


def check_table(report: AssumptionReport) -> Table:
    notes = ["analytic check" if report.analytic else "finite-difference check"]
    return Table(CHECK_COLUMNS, [(c.name, c.passed, c.detail) for c in report.checks], notes)

"""
Console summaries for the command-line front end.

This module handles all human-readable output; CSV goes through tables.py.
"""

import sys
from typing import Sequence

from isp_signaling.cli.tables import Table
from isp_signaling.demand import AssumptionReport
from isp_signaling.models import BargainOutcome, EquilibriumOutcome, IncentiveRegion, SignalDistribution


def display_header(title: str) -> None:
    """Display a section banner."""
    print("\n" + "=" * 40)
    print(f"    {title}")
    print("=" * 40)


def display_outcome(outcome: EquilibriumOutcome, dist: SignalDistribution) -> None:
    """
    Display equilibrium prices and utilities.

    Args:
        outcome: Solved equilibrium
        dist: Signal distribution (for labels)
    """
    status = "converged" if outcome.converged else "not converged"
    print(f"\nRegime: {outcome.regime.name} ({status}, {outcome.iterations} iterations)")
    print("-" * 40)
    for i, utility in enumerate(outcome.expected_utility_isp):
        prices = ", ".join(f"{label}={outcome.profile.price(i, t):.4f}" for t, label in enumerate(dist.labels))
        print(f"ISP {i + 1} | E[U]={utility:.4f} | {prices}")
    print(f"CP    | E[U]={outcome.expected_utility_cp:.4f}")
    print("-" * 40)
    for note in outcome.notes:
        print(f"Note: {note}")


def display_bargain(outcome: BargainOutcome) -> None:
    """Display the bargained side payment and the split it produces."""
    print(f"\n{outcome.mode.value}-bargaining at gamma={outcome.gamma}")
    print("-" * 40)
    print(f"Side payment:  {outcome.side_payment:.6f}")
    print(f"ISP 1 share:   {outcome.isp_share:.4f}")
    print(f"CP share:      {outcome.cp_share:.4f}")
    print("-" * 40)


def display_region(region: IncentiveRegion) -> None:
    """Display the incentive thresholds and regions."""
    print(f"\nISP incentive threshold:  {region.isp_threshold:.6f}")
    print(f"CP incentive threshold:   {region.cp_threshold:.6f}")
    print(f"Dominance threshold:      {region.dominance_threshold:.6f}")
    print(f"Region A (both gain):     {_interval(region.region_a)}")
    print(f"Region B (CP gains):      {_interval(region.region_b)}")
    for note in region.notes:
        print(f"Note: {note}")


def display_report(report: AssumptionReport) -> None:
    """Display one line per structural assumption."""
    for check in report.checks:
        status = "✓" if check.passed else "✗"
        print(f"{status} {check.name}: {check.detail}")


def display_table_summary(title: str, table: Table, notes: Sequence[str] = ()) -> None:
    """Display the row count and notes of an emitted table."""
    print(f"\n{title}: {len(table)} rows")
    for note in list(table.notes) + list(notes):
        print(f"Note: {note}")


def display_written(path: str) -> None:
    print(f"\nSuccess: wrote {path}")


def display_error(message: str) -> None:
    """
    Display error message.

    Args:
        message: Error message to display
    """
    print(f"\nError: {message}", file=sys.stderr)


def _interval(interval) -> str:
    if interval is None:
        return "empty"
    return f"[{interval[0]:.6f}, {interval[1]:.6f}]"

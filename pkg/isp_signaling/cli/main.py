"""
Command-line entry point.

Each command reads a scenario file, delegates to one library operation and
writes a CSV table (to --out, or to standard output when --out is omitted).
Errors map to exit codes: 2 validation, 3 non-convergence, 4 infeasibility,
5 I/O.
"""

import argparse
import contextlib
import logging
import sys
from typing import Callable, Dict, List, Optional

from isp_signaling.bargaining import bargain, compare_modes
from isp_signaling.cli import ui
from isp_signaling.cli.scenario import Scenario, parse_scenario
from isp_signaling.cli.tables import (
    Table,
    bargain_table,
    check_table,
    popb_table,
    render,
    solve_table,
    sweep_gamma_table,
    sweep_pd_table,
    thresholds_table,
    write_table,
)
from isp_signaling.collusion import incentive_region, sweep_pd
from isp_signaling.config import configure_logging
from isp_signaling.core.exceptions import PreconditionError, SignalingError, ValidationError
from isp_signaling.demand import check_assumptions
from isp_signaling.equilibrium import best_response_iterate, solve_closed
from isp_signaling.welfare import TauSweepRow, popb, sweep_tau

logger = logging.getLogger(__name__)

COMMANDS = ("solve", "sweep-pd", "sweep-gamma", "popb", "bargain", "thresholds", "check")
SOLVERS = ("closed", "iterate")


def _require_sweep(scenario: Scenario, variable: str, command: str) -> List[float]:
    if scenario.sweep is None or scenario.sweep.variable != variable:
        raise PreconditionError(f"{command} requires a sweep block with variable {variable}")
    return scenario.sweep.grid()


def handle_solve(scenario: Scenario, solver: str, tol: Optional[float]) -> Table:
    """Solve the scenario's regime with the closed form or by iteration (to tolerance tol)."""
    if solver == "iterate":
        outcome = best_response_iterate(scenario.regime, scenario.market, scenario.distribution, tol=tol)
    else:
        outcome = solve_closed(scenario.regime, scenario.market, scenario.distribution)
    ui.display_outcome(outcome, scenario.distribution)
    return solve_table(outcome, scenario.distribution)


def handle_sweep_pd(scenario: Scenario, solver: str, tol: Optional[float]) -> Table:
    """Collusion utilities over the p_d sweep."""
    grid = _require_sweep(scenario, "p_d", "sweep-pd")
    table = sweep_pd_table(sweep_pd(scenario.market, scenario.distribution, grid))
    ui.display_table_summary("Side-payment sweep", table)
    return table


def handle_sweep_gamma(scenario: Scenario, solver: str, tol: Optional[float]) -> Table:
    """Pre- versus post-bargaining over the gamma sweep."""
    grid = _require_sweep(scenario, "gamma", "sweep-gamma")
    table = sweep_gamma_table(compare_modes(scenario.market, scenario.distribution, grid))
    ui.display_table_summary("Bargaining comparison", table)
    return table


def handle_popb(scenario: Scenario, solver: str, tol: Optional[float]) -> Table:
    """PoPB of the scenario market, or over a tau sweep with alpha fixed."""
    market = scenario.market
    if scenario.sweep is not None and scenario.sweep.variable == "tau":
        rows = sweep_tau(market.alpha, scenario.sweep.grid(), scenario.distribution, market.p_a)
        notes = [f"tau sweep fixes alpha={market.alpha!r} and reuses the scenario distribution"]
    else:
        result = popb(market, scenario.distribution)
        rows = [
            TauSweepRow(
                tau=market.tau,
                beta=market.beta,
                popb=result.popb,
                pd_social=result.p_d_social,
                pd_nash=result.p_d_nash,
                vertex_feasible=result.vertex_feasible,
            )
        ]
        notes = []
    table = popb_table(rows, notes)
    ui.display_table_summary("Price of Partial Bargaining", table)
    return table


def handle_bargain(scenario: Scenario, solver: str, tol: Optional[float]) -> Table:
    """Side payment set by the scenario's bargaining mechanism."""
    if scenario.bargaining is None:
        raise PreconditionError("bargain requires a bargaining block")
    config = scenario.bargaining
    outcome = bargain(scenario.market, scenario.distribution, config.gamma, config.mode)
    ui.display_bargain(outcome)
    return bargain_table(outcome)


def handle_thresholds(scenario: Scenario, solver: str, tol: Optional[float]) -> Table:
    """Incentive thresholds and regions."""
    region = incentive_region(scenario.market, scenario.distribution)
    ui.display_region(region)
    return thresholds_table(region)


def handle_check(scenario: Scenario, solver: str, tol: Optional[float]) -> Table:
    """Structural assumption report."""
    report = check_assumptions(scenario.market)
    ui.display_report(report)
    return check_table(report)


HANDLERS: Dict[str, Callable[[Scenario, str, Optional[float]], Table]] = {
    "solve": handle_solve,
    "sweep-pd": handle_sweep_pd,
    "sweep-gamma": handle_sweep_gamma,
    "popb": handle_popb,
    "bargain": handle_bargain,
    "thresholds": handle_thresholds,
    "check": handle_check,
}


def run(
    command: str,
    scenario: str,
    out: Optional[str] = None,
    tol: Optional[float] = None,
    solver: str = "closed",
) -> int:
    """
    Run one command and return the process exit status.

    Args:
        command: One of COMMANDS
        scenario: Path of the scenario file
        out: CSV output path; None writes the CSV to standard output
        tol: Iteration tolerance for solve --solver iterate (default from settings)
        solver: "closed" or "iterate" (solve only)

    Returns:
        0 on success, otherwise the exit code of the raised error
    """
    try:
        if command not in HANDLERS:
            raise ValidationError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
        if solver not in SOLVERS:
            raise ValidationError(f"unknown solver {solver!r}; expected one of {', '.join(SOLVERS)}")
        if tol is not None and not tol > 0:
            raise ValidationError(f"--tol must be > 0, got {tol}")

        loaded = parse_scenario(scenario)
        if out is None:
            # keep standard output for the CSV itself
            with contextlib.redirect_stdout(sys.stderr):
                table = HANDLERS[command](loaded, solver, tol)
            sys.stdout.write(render(table, loaded.source_hash))
        else:
            table = HANDLERS[command](loaded, solver, tol)
            write_table(table, loaded.source_hash, out)
            ui.display_written(out)
        return 0
    except SignalingError as e:
        logger.debug("%s failed", command, exc_info=True)
        ui.display_error(str(e))
        return e.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isp-signaling",
        description="Equilibria, side-payment thresholds and bargaining in the ISP-CP signaling game",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--scenario", required=True, help="YAML scenario file")
    parser.add_argument("--out", default=None, help="CSV output path (default: standard output)")
    parser.add_argument("--tol", type=float, default=None, help="iteration tolerance for solve --solver iterate")
    parser.add_argument("--solver", choices=SOLVERS, default="closed", help="solve: closed form or iteration")
    parser.add_argument("--log-level", default=None, help="logging level (default from settings)")
    return parser


def main(argv: Optional[List[str]] = None) -> None:
    """
    Application entry point.

    Parses arguments, configures logging and exits with the run status.
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    sys.exit(run(args.command, args.scenario, args.out, args.tol, args.solver))


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""
relaycap - Outage Capacity of Large Relay Networks Under Random Attacks
=======================================================================

Computes the asymptotic epsilon-outage capacity upper bound and the
amplify-and-forward (AF) and decode-and-forward (DF) rates of a large
half-duplex fading relay network whose relays fail at random, optimizes
the source/relay power split, and checks the asymptotics with a finite-N
Monte Carlo simulator.

Usage:
    python main.py rates --gamma0-db 30 --p 0.1 --alpha 0.5 --epsilon 0.1
    python main.py rates --optimal            # use the optimal alpha per strategy
    python main.py alpha --gamma0-db 40       # AF/DF power-allocation optima
    python main.py sim --strategy DF --n-relays 500 --target-rate 1.0
    python main.py reproduce --figure 4 --output fig4.csv
    python main.py validate-config experiment.cfg

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from rich import box
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn
from rich.table import Table
from rich.text import Text

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from src import __version__
from src.analytic import (
    RateResult,
    Regime,
    SystemParams,
    af_high_snr_gap,
    af_outage_rate,
    df_outage_rate_approx,
    df_outage_rate_exact,
    mac_upper_bound,
)
from src.config import (
    LOG_FILE,
    LOG_LEVEL,
    ExperimentSpec,
    linear_to_db,
    parse_config,
    validate_settings,
)
from src.errors import ConfigError, NumericError
from src.experiments import collect_experiment, collect_simulation, total_trials
from src.poweralloc import (
    af_alpha_closed_form,
    df_alpha_result,
    optimize_af_alpha,
)
from src.result_writer import ExperimentResult, ResultWriter, print_result_table
from src.topology import NetworkGeometry, compute_moments, validate_geometry

# Console output goes to stderr so stdout carries nothing but CSV
console = Console(stderr=True)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


# ============================================================================
# LOGGING SETUP
# ============================================================================

def setup_logging(quiet: bool = False) -> None:
    """Configure logging with Rich handler."""
    log_dir = Path(LOG_FILE).parent
    log_dir.mkdir(parents=True, exist_ok=True)

    handlers: List[logging.Handler] = [logging.FileHandler(LOG_FILE, encoding="utf-8")]

    if not quiet:
        handlers.insert(0, RichHandler(
            console=console,
            rich_tracebacks=True,
            show_time=True,
            show_path=False,
        ))

    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
        format="%(message)s",
        datefmt="[%X]",
        handlers=handlers,
    )


# ============================================================================
# CONFIG LOADING
# ============================================================================

def _read_config_file(path: Optional[str]) -> str:
    if not path:
        return ""
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e


def _flag_overrides(args: argparse.Namespace) -> Dict[str, Optional[str]]:
    """Map command-line flags onto config keys (flags win over the file)."""
    mapping = {
        "seed": "sim.seed",
        "workers": "sim.workers",
        "output": "output.path",
        "gamma0_db": "system.gamma0_db",
        "p": "system.p",
        "alpha": "system.alpha",
        "epsilon": "system.epsilon",
        "strategy": "sim.strategy",
        "n_relays": "sim.n_relays",
        "target_rate": "sim.target_rate",
        "trials": "sim.trials",
    }
    overrides: Dict[str, Optional[str]] = {}
    for attr, key in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = str(value)

    if getattr(args, "fixed_placement", False):
        overrides["sim.resample_positions"] = "false"
    if getattr(args, "figure", None) is not None:
        overrides["sweep.preset"] = f"FIG{args.figure}"

    for item in getattr(args, "set", None) or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip().lower()] = value.strip()
    return overrides


def load(args: argparse.Namespace) -> Tuple[NetworkGeometry, SystemParams, ExperimentSpec]:
    """Resolve flags > config file > defaults."""
    return parse_config(_read_config_file(args.config), _flag_overrides(args))


# ============================================================================
# DISPLAY HELPERS
# ============================================================================

def _db(value: float) -> str:
    return f"{linear_to_db(value):.2f}" if value > 0 else "-inf"


def print_operating_point(params: SystemParams) -> None:
    """One-line summary of gamma0, p, alpha and epsilon."""
    console.print(
        f"[dim]gamma0 = [bold]{linear_to_db(params.gamma0):g} dB[/bold]  "
        f"p = [bold]{params.p:g}[/bold]  alpha = [bold]{params.alpha:g}[/bold]  "
        f"epsilon = [bold]{params.epsilon:g}[/bold][/dim]"
    )


def emit_csv(result: ExperimentResult, output: Optional[str]) -> None:
    """Write CSV to the output path, or to stdout when none is given."""
    writer = ResultWriter(output)
    document = writer.write(result)
    if output:
        console.print(f"[green]✓ Wrote {len(result.rows)} rows to {output}[/green]")
    else:
        sys.stdout.write(document)
        sys.stdout.flush()


def _progress() -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[bold blue]{task.description}"),
        BarColumn(),
        TextColumn("{task.completed}/{task.total} trials"),
        TimeElapsedColumn(),
        console=console,
        transient=True,
    )


# ============================================================================
# RATES COMMAND
# ============================================================================

def cmd_rates(args: argparse.Namespace) -> int:
    """Print every rate at one operating point."""
    geometry, params, _ = load(args)
    m = compute_moments(geometry)

    if args.optimal:
        af_params = params.with_(alpha=optimize_af_alpha(params, geometry).alpha_opt)
        # no DF optimum once every relay is attacked
        df_params = params.with_(alpha=df_alpha_result(params, m).alpha_opt) if params.p < 1.0 else params
        upper_params = params.with_(alpha=0.0)
    else:
        af_params = df_params = upper_params = params

    results: List[RateResult] = [
        mac_upper_bound(upper_params, m),
        af_outage_rate(af_params, geometry),
    ]
    if df_params.alpha > 0:
        results.append(df_outage_rate_exact(df_params, geometry))
        results.append(df_outage_rate_approx(df_params, m))

    table = Table(title="ε-outage rates", box=box.ROUNDED, header_style="bold cyan")
    table.add_column("Strategy", style="bold")
    table.add_column("alpha", justify="right")
    table.add_column("Rate (bits)", justify="right", style="green")
    table.add_column("Equivalent SNR (dB)", justify="right")
    table.add_column("Regime", style="dim")
    for result in results:
        table.add_row(
            result.strategy.value,
            f"{result.alpha_used:.4f}",
            f"{result.rate:.6f}",
            _db(result.received_snr),
            result.regime,
        )

    console.print()
    print_operating_point(params)
    console.print(table)

    if 0.0 < af_params.alpha < 1.0 and params.p < 1.0:
        gap = af_high_snr_gap(af_params, m)
        console.print(f"[dim]High-SNR AF gap to the upper bound: [bold]{gap:.4f} bits[/bold][/dim]")
    console.print()
    return EXIT_OK


# ============================================================================
# ALPHA COMMAND
# ============================================================================

def cmd_alpha(args: argparse.Namespace) -> int:
    """Print the power-allocation optima."""
    geometry, params, _ = load(args)
    m = compute_moments(geometry)

    results = [
        ("AF", optimize_af_alpha(params, geometry)),
        ("AF (low SNR)", af_alpha_closed_form(params, m, Regime.LOW)),
    ]
    if params.p < 1.0:
        results.append(("AF (high SNR)", af_alpha_closed_form(params, m, Regime.HIGH)))
        results.append(("DF (small outage)", df_alpha_result(params, m)))

    table = Table(title="Optimal source power fraction", box=box.ROUNDED, header_style="bold cyan")
    table.add_column("Strategy", style="bold")
    table.add_column("Method", style="dim")
    table.add_column("alpha*", justify="right", style="green")
    table.add_column("Objective", justify="right")
    for name, result in results:
        flag = " [yellow](flat)[/yellow]" if result.degenerate else ""
        table.add_row(name, result.method.value, f"{result.alpha_opt:.6f}{flag}", f"{result.objective_value:.6g}")

    console.print()
    print_operating_point(params)
    console.print(table)
    console.print("[dim]AF objective is the received SNR; DF objective is the rate in bits.[/dim]")
    console.print()
    return EXIT_OK


# ============================================================================
# SIM COMMAND
# ============================================================================

def cmd_sim(args: argparse.Namespace) -> int:
    """Run Monte Carlo outage estimates and emit one CSV row per configuration."""
    geometry, params, spec = load(args)

    with _progress() as progress:
        task = progress.add_task("Simulating", total=total_trials(spec))
        result = collect_simulation(
            spec, geometry, params,
            progress=lambda done: progress.advance(task, done),
        )

    if not args.quiet:
        print_result_table(result, title="Monte Carlo outage", target=console)
    emit_csv(result, spec.output_path)
    return EXIT_OK


# ============================================================================
# REPRODUCE COMMAND
# ============================================================================

def cmd_reproduce(args: argparse.Namespace) -> int:
    """Regenerate one figure preset as CSV."""
    geometry, params, spec = load(args)

    with _progress() as progress:
        task = progress.add_task(f"FIG{args.figure}", total=total_trials(spec) if args.figure == 3 else None)
        result = collect_experiment(
            spec, geometry, params,
            progress=lambda done: progress.advance(task, done),
        )

    if not args.quiet:
        print_result_table(result, limit=20, target=console)
    emit_csv(result, spec.output_path)
    return EXIT_OK


# ============================================================================
# VALIDATE-CONFIG COMMAND
# ============================================================================

def cmd_validate_config(args: argparse.Namespace) -> int:
    """Check a config file and show what it resolves to."""
    geometry, params, spec = load(args)
    report = validate_geometry(geometry)

    table = Table(show_header=False, box=box.SIMPLE)
    table.add_column("Item", style="bold")
    table.add_column("Value")
    table.add_row("Preset", spec.preset.value)
    table.add_row("Geometry", (
        f"{geometry.dimension}-D, source {geometry.source}, dest {geometry.dest}, "
        f"region {geometry.region_min}..{geometry.region_max}, theta {geometry.theta:g}, s0 {geometry.s0:g}"
    ))
    table.add_row("System", (
        f"gamma0 {linear_to_db(params.gamma0):g} dB, p {params.p:g}, "
        f"alpha {params.alpha:g}, epsilon {params.epsilon:g}"
    ))
    table.add_row("Sweep", (
        f"{len(spec.gamma0_grid_db())} SNR points, {len(spec.epsilons)} ε, {len(spec.ps)} p, "
        f"alpha {spec.alpha_policy}"
    ))
    table.add_row("Simulation", (
        f"{total_trials(spec)} trials, seed {spec.seed}, {spec.workers} worker(s), "
        f"{'resampled' if spec.resample_positions else 'fixed'} positions"
    ))
    table.add_row("Dead zone", "[green]✓ ok[/green]" if report.ok else "[red]violated[/red]")

    console.print(Panel(table, title="🔧 Configuration", border_style="green", box=box.ROUNDED))
    validate_and_warn()
    return EXIT_OK


def validate_and_warn() -> None:
    """Show environment-setting warnings."""
    issues = validate_settings()

    if not issues:
        console.print("[green]✓ Environment settings validated[/green]")
        return

    console.print(Panel(
        "\n".join(f"[yellow]![/yellow] {issue}" for issue in issues),
        title="⚠️ Warnings",
        border_style="yellow",
        box=box.ROUNDED,
    ))


# ============================================================================
# MAIN ENTRY POINT
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per task."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Flat key = value config file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="Override any config key")
    common.add_argument("--seed", type=int, help="Monte Carlo seed")
    common.add_argument("--workers", type=int, help="Worker threads")
    common.add_argument("--output", help="CSV output path (default: stdout)")
    common.add_argument("--quiet", action="store_true", help="Minimal console output")

    point = argparse.ArgumentParser(add_help=False)
    point.add_argument("--gamma0-db", type=float, help="Transmit SNR in dB")
    point.add_argument("--p", type=float, help="Attack probability")
    point.add_argument("--alpha", type=float, help="Source power fraction")
    point.add_argument("--epsilon", type=float, help="Outage target")

    parser = argparse.ArgumentParser(
        description="relaycap - outage capacity of large relay networks under random attacks"
    )
    parser.add_argument("--version", action="version", version=f"relaycap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    rates = sub.add_parser("rates", parents=[common, point], help="All rates at one operating point")
    rates.add_argument("--optimal", action="store_true", help="Use each strategy's optimal alpha")
    rates.set_defaults(handler=cmd_rates)

    alpha = sub.add_parser("alpha", parents=[common, point], help="Optimal power allocation")
    alpha.set_defaults(handler=cmd_alpha)

    sim = sub.add_parser("sim", parents=[common, point], help="Monte Carlo outage estimate")
    sim.add_argument("--strategy", help="MAC, AF or DF (comma-separated list allowed)")
    sim.add_argument("--n-relays", help="Relay count(s), comma-separated")
    sim.add_argument("--target-rate", help="Target rate(s) in bits, comma-separated")
    sim.add_argument("--trials", type=int, help="Trials per configuration")
    sim.add_argument("--fixed-placement", action="store_true", help="Keep one relay placement for all trials")
    sim.set_defaults(handler=cmd_sim)

    reproduce = sub.add_parser("reproduce", parents=[common], help="Regenerate a figure preset as CSV")
    reproduce.add_argument("--figure", type=int, choices=(2, 3, 4, 5), required=True)
    reproduce.add_argument("--trials", type=int, help="Trials per configuration (figure 3)")
    reproduce.set_defaults(handler=cmd_reproduce)

    check = sub.add_parser("validate-config", parents=[common], help="Check a config file")
    check.add_argument("path", nargs="?", help="Config file (same as --config)")
    check.set_defaults(handler=cmd_validate_config)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    if getattr(args, "path", None):
        args.config = args.path

    setup_logging(quiet=args.quiet)
    logger = logging.getLogger(__name__)

    try:
        return args.handler(args)
    except ConfigError as e:
        logger.debug("Configuration error", exc_info=True)
        console.print(Panel(Text(str(e)), title="Configuration error", border_style="red", box=box.ROUNDED))
        return EXIT_CONFIG
    except NumericError as e:
        logger.debug("Numerical failure", exc_info=True)
        console.print(Panel(Text(str(e)), title="Numerical failure", border_style="red", box=box.ROUNDED))
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

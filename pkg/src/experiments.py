"""
Experiments Module - Presets, parameter sweeps and CSV documents.

Presets:
- FIG2: exact vs small-outage DF rate over transmit SNR
- FIG3: Monte Carlo outage vs the large-N Gaussian outage (sim axes, system operating point)
- FIG4: upper bound and AF/DF rates under optimal power allocation
- FIG5: rate loss due to random attacks
- CUSTOM: every strategy over a gamma0 x epsilon x p grid

Sweep points are independent and may run in parallel; rows are sorted
canonically afterwards so the document never depends on scheduling.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Tuple

from . import __version__
from .analytic import (
    SystemParams,
    af_outage_rate,
    df_outage_rate_approx,
    df_outage_rate_exact,
    gaussian_outage,
    mac_upper_bound,
)
from .config import AlphaPolicyKind, ExperimentSpec, Preset, db_to_linear, linear_to_db
from .errors import ConfigError, NumericError
from .montecarlo import ProgressHook, TrialConfig, estimate_outage
from .poweralloc import df_alpha_opt, optimize_af_alpha
from .result_writer import ExperimentResult, render_csv
from .topology import NetworkGeometry, TopologyMoments, compute_moments, line_geometry

logger = logging.getLogger(__name__)

Row = Dict[str, Any]


# ============================================================================
# CONFIGURATION
# ============================================================================

PRESET_COLUMNS: Dict[Preset, List[str]] = {
    Preset.FIG2: ["gamma0_db", "epsilon", "r_df_exact", "r_df_approx"],
    Preset.FIG3: ["strategy", "n_relays", "target_rate", "outage_mc", "ci95", "outage_gauss"],
    Preset.FIG4: ["gamma0_db", "epsilon", "c_upper", "r_af_opt", "alpha_af", "r_df_opt", "alpha_df"],
    Preset.FIG5: ["gamma0_db", "p", "strategy", "rate", "rate_p0", "loss_bits", "loss_fraction"],
    Preset.CUSTOM: [
        "gamma0_db", "epsilon", "p", "c_upper",
        "r_af", "alpha_af", "r_df_exact", "r_df_approx", "alpha_df",
    ],
}

# Canonical row order
SORT_KEYS: Dict[Preset, Tuple[str, ...]] = {
    Preset.FIG2: ("gamma0_db", "epsilon"),
    Preset.FIG3: ("strategy", "n_relays", "target_rate"),
    Preset.FIG4: ("gamma0_db", "epsilon"),
    Preset.FIG5: ("gamma0_db", "p", "strategy"),
    Preset.CUSTOM: ("gamma0_db", "epsilon", "p"),
}

# Presets whose columns carry no p take a single attack probability
SINGLE_P_PRESETS = (Preset.FIG2, Preset.FIG4)

FIG5_STRATEGIES = ("AF", "DF")


# ============================================================================
# ALPHA RESOLUTION
# ============================================================================

def resolve_alpha(
    strategy: str,
    spec: ExperimentSpec,
    params: SystemParams,
    g: NetworkGeometry,
    m: TopologyMoments,
) -> float:
    """
    Source power fraction a strategy uses at one sweep point.

    FIXED returns the policy value. OPTIMAL maximizes the strategy's own rate:
    golden-section search for AF, the closed form for DF, and alpha = 0 for
    the upper bound (which decreases in alpha).
    """
    if spec.alpha_policy.kind is AlphaPolicyKind.FIXED:
        return float(spec.alpha_policy.value)
    if strategy == "AF":
        return optimize_af_alpha(params, g).alpha_opt
    if strategy == "DF":
        return df_alpha_opt(params, m)
    return 0.0


# ============================================================================
# ROW BUILDERS
# ============================================================================

def _fig2_row(gamma0_db: float, epsilon: float, p: float, ctx: "_Context") -> List[Row]:
    params = ctx.params.with_(gamma0=db_to_linear(gamma0_db), p=p, epsilon=epsilon)
    alpha = resolve_alpha("DF", ctx.spec, params, ctx.geometry, ctx.moments)
    params = params.with_(alpha=alpha)
    return [{
        "gamma0_db": gamma0_db,
        "epsilon": epsilon,
        "r_df_exact": df_outage_rate_exact(params, ctx.geometry).rate,
        "r_df_approx": df_outage_rate_approx(params, ctx.moments).rate,
    }]


def _fig4_row(gamma0_db: float, epsilon: float, p: float, ctx: "_Context") -> List[Row]:
    params = ctx.params.with_(gamma0=db_to_linear(gamma0_db), p=p, epsilon=epsilon)
    alpha_af = resolve_alpha("AF", ctx.spec, params, ctx.geometry, ctx.moments)
    alpha_df = resolve_alpha("DF", ctx.spec, params, ctx.geometry, ctx.moments)
    return [{
        "gamma0_db": gamma0_db,
        "epsilon": epsilon,
        # The bound is tightest with every watt on the relays
        "c_upper": mac_upper_bound(params.with_(alpha=0.0), ctx.moments).rate,
        "r_af_opt": af_outage_rate(params.with_(alpha=alpha_af), ctx.geometry).rate,
        "alpha_af": alpha_af,
        "r_df_opt": df_outage_rate_approx(params.with_(alpha=alpha_df), ctx.moments).rate,
        "alpha_df": alpha_df,
    }]


def _strategy_rate(strategy: str, params: SystemParams, ctx: "_Context") -> float:
    if strategy == "AF":
        return af_outage_rate(params, ctx.geometry).rate
    return df_outage_rate_approx(params, ctx.moments).rate


def _fig5_row(gamma0_db: float, epsilon: float, p: float, ctx: "_Context") -> List[Row]:
    rows = []
    base = ctx.params.with_(gamma0=db_to_linear(gamma0_db), p=p, epsilon=epsilon)
    for strategy in FIG5_STRATEGIES:
        alpha = resolve_alpha(strategy, ctx.spec, base, ctx.geometry, ctx.moments)
        params = base.with_(alpha=alpha)
        rate = _strategy_rate(strategy, params, ctx)
        rate_p0 = _strategy_rate(strategy, params.with_(p=0.0), ctx)
        rows.append({
            "gamma0_db": gamma0_db,
            "p": p,
            "strategy": strategy,
            "rate": rate,
            "rate_p0": rate_p0,
            "loss_bits": rate_p0 - rate,
            "loss_fraction": 1.0 - rate / rate_p0 if rate_p0 > 0 else 0.0,
        })
    return rows


def _custom_row(gamma0_db: float, epsilon: float, p: float, ctx: "_Context") -> List[Row]:
    params = ctx.params.with_(gamma0=db_to_linear(gamma0_db), p=p, epsilon=epsilon)
    alpha_af = resolve_alpha("AF", ctx.spec, params, ctx.geometry, ctx.moments)
    alpha_df = resolve_alpha("DF", ctx.spec, params, ctx.geometry, ctx.moments)
    alpha_upper = resolve_alpha("MAC", ctx.spec, params, ctx.geometry, ctx.moments)
    df_params = params.with_(alpha=alpha_df)
    return [{
        "gamma0_db": gamma0_db,
        "epsilon": epsilon,
        "p": p,
        "c_upper": mac_upper_bound(params.with_(alpha=alpha_upper), ctx.moments).rate,
        "r_af": af_outage_rate(params.with_(alpha=alpha_af), ctx.geometry).rate,
        "alpha_af": alpha_af,
        "r_df_exact": df_outage_rate_exact(df_params, ctx.geometry).rate if alpha_df > 0 else 0.0,
        "r_df_approx": df_outage_rate_approx(df_params, ctx.moments).rate if alpha_df > 0 else 0.0,
        "alpha_df": alpha_df,
    }]


ROW_BUILDERS: Dict[Preset, Callable[[float, float, float, "_Context"], List[Row]]] = {
    Preset.FIG2: _fig2_row,
    Preset.FIG4: _fig4_row,
    Preset.FIG5: _fig5_row,
    Preset.CUSTOM: _custom_row,
}


class _Context:
    """What every row builder of one run shares."""

    def __init__(self, spec: ExperimentSpec, geometry: NetworkGeometry, params: SystemParams):
        self.spec = spec
        self.geometry = geometry
        self.params = params
        self.moments = compute_moments(geometry)


# ============================================================================
# SWEEPS
# ============================================================================

def _with_context(preset: Preset, point: Tuple[float, float, float], build: Callable[[], List[Row]]) -> List[Row]:
    gamma0_db, epsilon, p = point
    where = f"{preset.value} gamma0_db={gamma0_db:g} epsilon={epsilon:g} p={p:g}"
    try:
        return build()
    except ConfigError as exc:
        raise ConfigError(f"[{where}] {exc}") from exc
    except NumericError as exc:
        raise NumericError(f"[{where}] {exc}") from exc


def analytic_sweep(
    spec: ExperimentSpec,
    geometry: NetworkGeometry,
    params: SystemParams,
    workers: int = 1,
) -> List[Row]:
    """Rows of an analytic preset over gamma0 x epsilon x p."""
    build = ROW_BUILDERS[spec.preset]
    ctx = _Context(spec, geometry, params)
    points = [
        (gamma0_db, epsilon, p)
        for gamma0_db in spec.gamma0_grid_db()
        for epsilon in spec.epsilons
        for p in spec.ps
    ]

    def run(point: Tuple[float, float, float]) -> List[Row]:
        return _with_context(spec.preset, point, lambda: build(*point, ctx))

    if workers <= 1:
        chunks = [run(point) for point in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            chunks = list(executor.map(run, points))
    return [row for chunk in chunks for row in chunk]


def simulation_sweep(
    spec: ExperimentSpec,
    geometry: NetworkGeometry,
    params: SystemParams,
    workers: int = 1,
    progress: Optional[ProgressHook] = None,
) -> List[Row]:
    """
    One Monte Carlo estimate per (strategy, N, target rate) at the operating
    point of params; the alpha policy is resolved per strategy.
    """
    moments = compute_moments(geometry)
    point = (linear_to_db(params.gamma0), params.epsilon, params.p)

    rows = []
    for strategy in spec.strategies:
        alpha = resolve_alpha(strategy.value, spec, params, geometry, moments)
        point_params = params.with_(alpha=alpha)
        for n_relays in spec.n_relays:
            for rate in spec.target_rates:

                def build() -> List[Row]:
                    cfg = TrialConfig(
                        n_relays=n_relays,
                        strategy=strategy,
                        target_rate=rate,
                        trials=spec.trials,
                        seed=spec.seed,
                        params=point_params,
                        geometry=geometry,
                        resample_positions=spec.resample_positions,
                    )
                    estimate = estimate_outage(cfg, workers=workers, progress=progress)
                    return [{
                        "strategy": strategy.value,
                        "n_relays": n_relays,
                        "target_rate": rate,
                        "outage_mc": estimate.outage_freq,
                        "ci95": estimate.ci95_halfwidth,
                        "outage_gauss": gaussian_outage(strategy.value, rate, point_params, geometry),
                    }]

                rows.extend(_with_context(spec.preset, point, build))
    return rows


def sort_rows(preset: Preset, rows: List[Row]) -> List[Row]:
    """Sort rows canonically by the preset's key columns."""
    keys = SORT_KEYS[preset]
    return sorted(rows, key=lambda row: tuple(row[k] for k in keys))


def total_trials(spec: ExperimentSpec) -> int:
    """Trials a FIG3 run performs (for progress bars)."""
    return spec.trials * len(spec.strategies) * len(spec.n_relays) * len(spec.target_rates)


# ============================================================================
# RUN EXPERIMENT
# ============================================================================

DEFAULT_PARAMS = SystemParams(gamma0=db_to_linear(30.0), p=0.1, alpha=0.5, epsilon=0.1)


def _csv_list(values) -> str:
    return ",".join(f"{v:g}" for v in values)


def provenance_lines(
    spec: ExperimentSpec,
    geometry: NetworkGeometry,
    params: SystemParams,
    label: Optional[str] = None,
) -> List[str]:
    """'#' header lines: tool version, seed, preset, geometry and preset fillers."""
    region = "x".join(f"[{lo:g},{hi:g}]" for lo, hi in zip(geometry.region_min, geometry.region_max))
    lines = [
        f"relaycap {__version__}",
        f"preset: {label or spec.preset.value}",
        f"seed: {spec.seed}",
        (
            f"geometry: source={_csv_list(geometry.source)} dest={_csv_list(geometry.dest)} "
            f"region={region} theta={geometry.theta:g} s0={geometry.s0:g}"
        ),
    ]
    if spec.preset is Preset.FIG3 or label:
        lines.append(
            f"sim: gamma0_db={linear_to_db(params.gamma0):g} p={params.p:g} "
            f"alpha_policy={spec.alpha_policy} trials={spec.trials} "
            f"resample_positions={str(spec.resample_positions).lower()}"
        )
    else:
        lines.append(
            f"sweep: gamma0_db={spec.gamma0_db_start:g}..{spec.gamma0_db_stop:g} step {spec.gamma0_db_step:g} "
            f"epsilons={_csv_list(spec.epsilons)} ps={_csv_list(spec.ps)} alpha_policy={spec.alpha_policy}"
        )
    if spec.fillers and not label:
        lines.append("fillers: " + " ".join(f"{k}={v}" for k, v in sorted(spec.fillers.items())))
    return lines


def collect_experiment(
    spec: ExperimentSpec,
    geometry: Optional[NetworkGeometry] = None,
    params: Optional[SystemParams] = None,
    workers: Optional[int] = None,
    progress: Optional[ProgressHook] = None,
) -> ExperimentResult:
    """
    Run a preset and return its sorted rows.

    Args:
        spec: Experiment spec
        geometry: Geometry (default: the line network)
        params: Base system parameters; sweep axes override gamma0, p and epsilon
        workers: Worker threads (default: spec.workers)
        progress: Trial progress hook for FIG3

    Returns:
        ExperimentResult with canonical row order

    Raises:
        ConfigError: If the spec does not fit the preset
        NumericError: With the failing sweep point in the message
    """
    geometry = geometry or line_geometry()
    params = params or DEFAULT_PARAMS
    workers = workers or spec.workers

    if spec.preset in SINGLE_P_PRESETS and len(spec.ps) != 1:
        raise ConfigError(f"preset {spec.preset.value} takes a single attack probability", key="sweep.ps")
    if spec.preset is Preset.FIG5 and len(spec.epsilons) != 1:
        raise ConfigError("preset FIG5 takes a single outage target", key="sweep.epsilons")

    if spec.preset is Preset.FIG3:
        rows = simulation_sweep(spec, geometry, params, workers=workers, progress=progress)
    else:
        rows = analytic_sweep(spec, geometry, params, workers=workers)

    result = ExperimentResult(
        preset=spec.preset.value,
        columns=list(PRESET_COLUMNS[spec.preset]),
        rows=sort_rows(spec.preset, rows),
        provenance=provenance_lines(spec, geometry, params),
    )
    logger.info(f"{spec.preset.value}: {len(result.rows)} rows")
    return result


def collect_simulation(
    spec: ExperimentSpec,
    geometry: Optional[NetworkGeometry] = None,
    params: Optional[SystemParams] = None,
    workers: Optional[int] = None,
    progress: Optional[ProgressHook] = None,
) -> ExperimentResult:
    """Monte Carlo rows for the sim axes of any spec, at the operating point of params."""
    geometry = geometry or line_geometry()
    params = params or DEFAULT_PARAMS
    rows = simulation_sweep(spec, geometry, params, workers=workers or spec.workers, progress=progress)
    return ExperimentResult(
        preset="SIM",
        columns=list(PRESET_COLUMNS[Preset.FIG3]),
        rows=sort_rows(Preset.FIG3, rows),
        provenance=provenance_lines(spec, geometry, params, label="SIM"),
    )


def run_experiment(
    spec: ExperimentSpec,
    geometry: Optional[NetworkGeometry] = None,
    params: Optional[SystemParams] = None,
    workers: Optional[int] = None,
    progress: Optional[ProgressHook] = None,
) -> str:
    """Run a preset and return its CSV document."""
    return render_csv(collect_experiment(spec, geometry, params, workers, progress))

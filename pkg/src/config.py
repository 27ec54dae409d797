"""
Configuration module for relaycap.
Handles environment settings, experiment presets and config-file parsing.
"""

import io
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple

from dotenv import dotenv_values, load_dotenv

from .analytic import SystemParams
from .errors import ConfigError
from .montecarlo import SEED_LIMIT, SimStrategy
from .topology import DEFAULT_DEST, DEFAULT_REGION, DEFAULT_S0, DEFAULT_SOURCE, DEFAULT_THETA, NetworkGeometry

# Load environment variables from .env file
load_dotenv()


# ============================================================================
# ENVIRONMENT SETTINGS
# ============================================================================

# Logging
LOG_LEVEL: str = os.getenv("RELAYCAP_LOG_LEVEL", "INFO")
LOG_FILE: str = os.getenv("RELAYCAP_LOG_FILE", "logs/relaycap.log")

# Monte Carlo defaults (config files and flags override these)
DEFAULT_WORKERS: int = int(os.getenv("RELAYCAP_WORKERS", "1"))
DEFAULT_SEED: int = int(os.getenv("RELAYCAP_SEED", "7"))
DEFAULT_TRIALS: int = int(os.getenv("RELAYCAP_TRIALS", "10000"))


def validate_settings() -> List[str]:
    """
    Validate environment settings and return list of any issues found.
    """
    issues = []

    if LOG_LEVEL.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        issues.append(f"RELAYCAP_LOG_LEVEL={LOG_LEVEL!r} is not a logging level; INFO is used")

    if DEFAULT_WORKERS < 1:
        issues.append("RELAYCAP_WORKERS should be at least 1")
    elif DEFAULT_WORKERS > (os.cpu_count() or 1) * 4:
        issues.append(f"RELAYCAP_WORKERS={DEFAULT_WORKERS} is far above the CPU count")

    if not 0 <= DEFAULT_SEED < SEED_LIMIT:
        issues.append("RELAYCAP_SEED must be a 64-bit unsigned integer")

    if DEFAULT_TRIALS < 1000:
        issues.append(f"RELAYCAP_TRIALS={DEFAULT_TRIALS} gives confidence intervals wider than 0.03")

    return issues


# ============================================================================
# UNIT CONVERSION
# ============================================================================

def db_to_linear(db: float) -> float:
    """10^(dB/10)."""
    return 10.0 ** (db / 10.0)


def linear_to_db(value: float) -> float:
    """10 log10(value)."""
    if value <= 0:
        raise ValueError(f"dB undefined for {value}")
    return 10.0 * math.log10(value)


# ============================================================================
# EXPERIMENT SPEC
# ============================================================================

class Preset(str, Enum):
    FIG2 = "FIG2"
    FIG3 = "FIG3"
    FIG4 = "FIG4"
    FIG5 = "FIG5"
    CUSTOM = "CUSTOM"


class AlphaPolicyKind(str, Enum):
    FIXED = "FIXED"
    OPTIMAL = "OPTIMAL"


@dataclass(frozen=True)
class AlphaPolicy:
    """FIXED uses one alpha everywhere; OPTIMAL resolves alpha per sweep point and strategy."""
    kind: AlphaPolicyKind
    value: Optional[float] = None

    def __str__(self) -> str:
        if self.kind is AlphaPolicyKind.OPTIMAL:
            return "optimal"
        return f"fixed:{self.value:g}"


@dataclass(frozen=True)
class ExperimentSpec:
    """Preset, sweep axes and Monte Carlo settings of one run."""
    preset: Preset
    gamma0_db_start: float
    gamma0_db_stop: float
    gamma0_db_step: float
    epsilons: Tuple[float, ...]
    ps: Tuple[float, ...]
    alpha_policy: AlphaPolicy
    seed: int = DEFAULT_SEED
    output_path: Optional[str] = None
    n_relays: Tuple[int, ...] = (200,)
    strategies: Tuple[SimStrategy, ...] = (SimStrategy.DF,)
    target_rates: Tuple[float, ...] = (1.0,)
    trials: int = DEFAULT_TRIALS
    resample_positions: bool = True
    workers: int = DEFAULT_WORKERS
    fillers: Dict[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        for name in ("gamma0_db_start", "gamma0_db_stop", "gamma0_db_step"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError("dB range must be finite", key=f"sweep.{name}")
        if self.gamma0_db_stop < self.gamma0_db_start:
            raise ConfigError("stop must not be below start", key="sweep.gamma0_db_stop")
        if self.gamma0_db_step <= 0:
            raise ConfigError("step must be positive", key="sweep.gamma0_db_step")
        for key, axis in (
            ("sweep.epsilons", self.epsilons),
            ("sweep.ps", self.ps),
            ("sim.n_relays", self.n_relays),
            ("sim.strategy", self.strategies),
            ("sim.target_rate", self.target_rates),
        ):
            if not axis:
                raise ConfigError("sweep axis is empty", key=key)
        if any(not 0.0 < eps < 1.0 for eps in self.epsilons):
            raise ConfigError(f"outage targets must be in (0, 1), got {self.epsilons}", key="sweep.epsilons")
        if any(not 0.0 <= p <= 1.0 for p in self.ps):
            raise ConfigError(f"attack probabilities must be in [0, 1], got {self.ps}", key="sweep.ps")
        if self.alpha_policy.kind is AlphaPolicyKind.FIXED and not 0.0 <= (self.alpha_policy.value or 0.0) < 1.0:
            raise ConfigError(f"fixed alpha must be in [0, 1), got {self.alpha_policy.value}", key="sweep.alpha_policy")
        if any(n < 1 for n in self.n_relays):
            raise ConfigError("relay counts must be at least 1", key="sim.n_relays")
        if any(r < 0 for r in self.target_rates):
            raise ConfigError("target rates must be non-negative", key="sim.target_rate")
        if self.trials < 1:
            raise ConfigError("need at least one trial", key="sim.trials")
        if not 0 <= self.seed < SEED_LIMIT:
            raise ConfigError("seed must be a 64-bit unsigned integer", key="sim.seed")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1", key="sim.workers")

    def gamma0_grid_db(self) -> List[float]:
        """Transmit SNRs of the sweep, in dB, start and stop included."""
        count = int(math.floor((self.gamma0_db_stop - self.gamma0_db_start) / self.gamma0_db_step + 1e-9)) + 1
        return [round(self.gamma0_db_start + i * self.gamma0_db_step, 10) for i in range(count)]


# ============================================================================
# CONFIG KEYS AND DEFAULTS
# ============================================================================

# Built-in defaults: the line network with theta = 2 and s0 = 1
BASE_DEFAULTS: Dict[str, str] = {
    "geometry.dimension": "1",
    "geometry.source": f"{DEFAULT_SOURCE:g}",
    "geometry.dest": f"{DEFAULT_DEST:g}",
    "geometry.region_min": f"{DEFAULT_REGION[0]:g}",
    "geometry.region_max": f"{DEFAULT_REGION[1]:g}",
    "geometry.theta": f"{DEFAULT_THETA:g}",
    "geometry.s0": f"{DEFAULT_S0:g}",
    "system.gamma0_db": "30",
    "system.p": "0.1",
    "system.alpha": "0.5",
    "system.epsilon": "0.1",
    "sweep.preset": "CUSTOM",
    "sweep.gamma0_db_start": "-10",
    "sweep.gamma0_db_stop": "40",
    "sweep.gamma0_db_step": "5",
    "sweep.epsilons": "0.1",
    "sweep.ps": "0.1",
    "sweep.alpha_policy": "fixed",
    "sim.n_relays": "200",
    "sim.strategy": "DF",
    "sim.target_rate": "1.0",
    "sim.trials": str(DEFAULT_TRIALS),
    "sim.seed": str(DEFAULT_SEED),
    "sim.resample_positions": "true",
    "sim.workers": str(DEFAULT_WORKERS),
    "output.path": "",
}

# 2-D geometries without explicit coordinates get this rectangle
PLANAR_DEFAULTS: Dict[str, str] = {
    "geometry.source": "0,0",
    "geometry.dest": "12,0",
    "geometry.region_min": "1,-5",
    "geometry.region_max": "11,5",
}

# Parameters each preset binds; the captions state only some of them
PRESET_DEFAULTS: Dict[Preset, Dict[str, str]] = {
    Preset.FIG2: {
        "sweep.epsilons": "0.1,0.05,0.01,0.001",
        "sweep.ps": "0.1",
        "sweep.alpha_policy": "fixed:0.5",
    },
    Preset.FIG3: {
        "system.gamma0_db": "30",
        "system.p": "0.2",
        "system.alpha": "0.5",
        "sweep.alpha_policy": "fixed:0.5",
        "sim.n_relays": "50,200,500",
        "sim.strategy": "MAC,AF,DF",
        "sim.target_rate": "0.25,0.5,1.0,1.5,2.0,2.5",
    },
    Preset.FIG4: {
        "sweep.epsilons": "0.1,0.01",
        "sweep.ps": "0.1",
        "sweep.alpha_policy": "optimal",
    },
    Preset.FIG5: {
        "sweep.epsilons": "0.1",
        "sweep.ps": "0.1,0.3,0.5",
        "sweep.alpha_policy": "fixed:0.6",
    },
    Preset.CUSTOM: {},
}

KNOWN_KEYS = frozenset(BASE_DEFAULTS)

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


# ============================================================================
# VALUE PARSING
# ============================================================================

def _float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"expected a number, got {raw!r}", key=key) from None


def _int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"expected an integer, got {raw!r}", key=key) from None


def _split(raw: str) -> List[str]:
    return [part.strip() for part in raw.split(",") if part.strip()]


def _float_list(key: str, raw: str) -> Tuple[float, ...]:
    return tuple(_float(key, part) for part in _split(raw))


def _bool(key: str, raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ConfigError(f"expected true or false, got {raw!r}", key=key)


def _point(key: str, raw: str, dimension: int) -> Tuple[float, ...]:
    point = _float_list(key, raw)
    if len(point) != dimension:
        raise ConfigError(f"expected {dimension} coordinate(s), got {raw!r}", key=key)
    return point


def parse_alpha_policy(raw: str, fallback: float) -> AlphaPolicy:
    """
    Parse "optimal", "fixed" (uses the fallback alpha) or "fixed:<alpha>".

    A bare number is read as a fixed alpha.
    """
    key = "sweep.alpha_policy"
    text = raw.strip().lower()
    if text == "optimal":
        return AlphaPolicy(AlphaPolicyKind.OPTIMAL)
    if text == "fixed":
        return AlphaPolicy(AlphaPolicyKind.FIXED, fallback)
    if text.startswith("fixed:"):
        return AlphaPolicy(AlphaPolicyKind.FIXED, _float(key, text.split(":", 1)[1]))
    try:
        return AlphaPolicy(AlphaPolicyKind.FIXED, float(text))
    except ValueError:
        raise ConfigError(f"expected optimal, fixed or fixed:<alpha>, got {raw!r}", key=key) from None


def read_document(text: str) -> Dict[str, str]:
    """
    Read a flat key = value document.

    Raises:
        ConfigError: On unknown keys or keys without a value
    """
    values = dotenv_values(stream=io.StringIO(text), interpolate=False)
    document: Dict[str, str] = {}
    for key, value in values.items():
        key = key.strip().lower()
        if key not in KNOWN_KEYS:
            raise ConfigError("unknown key", key=key)
        if value is None or not value.strip():
            raise ConfigError("value is missing", key=key)
        document[key] = value.strip()
    return document


# ============================================================================
# PARSE CONFIG
# ============================================================================

def parse_config(
    text: str = "",
    overrides: Optional[Mapping[str, Optional[str]]] = None,
) -> Tuple[NetworkGeometry, SystemParams, ExperimentSpec]:
    """
    Parse a configuration document into validated objects.

    Precedence is overrides > document > preset defaults > built-in defaults.

    Args:
        text: Flat key = value document (may be empty)
        overrides: Values from command-line flags; None entries are ignored

    Returns:
        Tuple of (NetworkGeometry, SystemParams, ExperimentSpec)

    Raises:
        ConfigError: Unknown key, bad value, or dead-zone violation (names the key)
    """
    explicit = read_document(text)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in KNOWN_KEYS:
            raise ConfigError("unknown key", key=key)
        explicit[key] = str(value)

    preset_name = explicit.get("sweep.preset", BASE_DEFAULTS["sweep.preset"]).upper()
    try:
        preset = Preset(preset_name)
    except ValueError:
        raise ConfigError(f"expected one of {[p.value for p in Preset]}, got {preset_name!r}", key="sweep.preset") from None

    merged: Dict[str, str] = dict(BASE_DEFAULTS)
    if _int("geometry.dimension", explicit.get("geometry.dimension", "1")) == 2:
        merged.update(PLANAR_DEFAULTS)
    merged.update(PRESET_DEFAULTS[preset])
    merged.update(explicit)

    geometry = _build_geometry(merged)
    params = _build_params(merged)
    spec = _build_spec(merged, preset, params)
    return geometry, params, spec


def _build_geometry(values: Mapping[str, str]) -> NetworkGeometry:
    dimension = _int("geometry.dimension", values["geometry.dimension"])
    if dimension not in (1, 2):
        raise ConfigError(f"dimension must be 1 or 2, got {dimension}", key="geometry.dimension")
    return NetworkGeometry(
        source=_point("geometry.source", values["geometry.source"], dimension),
        dest=_point("geometry.dest", values["geometry.dest"], dimension),
        region_min=_point("geometry.region_min", values["geometry.region_min"], dimension),
        region_max=_point("geometry.region_max", values["geometry.region_max"], dimension),
        theta=_float("geometry.theta", values["geometry.theta"]),
        s0=_float("geometry.s0", values["geometry.s0"]),
        dimension=dimension,
    )


def _build_params(values: Mapping[str, str]) -> SystemParams:
    gamma0_db = _float("system.gamma0_db", values["system.gamma0_db"])
    try:
        gamma0 = db_to_linear(gamma0_db)
    except OverflowError:
        gamma0 = math.inf
    if not math.isfinite(gamma0):
        raise ConfigError(f"transmit SNR out of range: {gamma0_db} dB", key="system.gamma0_db")
    try:
        return SystemParams(
            gamma0=gamma0,
            p=_float("system.p", values["system.p"]),
            alpha=_float("system.alpha", values["system.alpha"]),
            epsilon=_float("system.epsilon", values["system.epsilon"]),
        )
    except ConfigError as exc:
        if exc.key == "system.gamma0":
            raise ConfigError(f"transmit SNR out of range: {gamma0_db} dB", key="system.gamma0_db") from exc
        raise


def _build_spec(values: Mapping[str, str], preset: Preset, params: SystemParams) -> ExperimentSpec:
    strategies = []
    for name in _split(values["sim.strategy"]):
        try:
            strategies.append(SimStrategy(name.upper()))
        except ValueError:
            raise ConfigError(f"expected MAC, AF or DF, got {name!r}", key="sim.strategy") from None

    return ExperimentSpec(
        preset=preset,
        gamma0_db_start=_float("sweep.gamma0_db_start", values["sweep.gamma0_db_start"]),
        gamma0_db_stop=_float("sweep.gamma0_db_stop", values["sweep.gamma0_db_stop"]),
        gamma0_db_step=_float("sweep.gamma0_db_step", values["sweep.gamma0_db_step"]),
        epsilons=_float_list("sweep.epsilons", values["sweep.epsilons"]),
        ps=_float_list("sweep.ps", values["sweep.ps"]),
        alpha_policy=parse_alpha_policy(values["sweep.alpha_policy"], params.alpha),
        seed=_int("sim.seed", values["sim.seed"]),
        output_path=values["output.path"] or None,
        n_relays=tuple(_int("sim.n_relays", part) for part in _split(values["sim.n_relays"])),
        strategies=tuple(strategies),
        target_rates=_float_list("sim.target_rate", values["sim.target_rate"]),
        trials=_int("sim.trials", values["sim.trials"]),
        resample_positions=_bool("sim.resample_positions", values["sim.resample_positions"]),
        workers=_int("sim.workers", values["sim.workers"]),
        fillers=dict(PRESET_DEFAULTS[preset]),
    )

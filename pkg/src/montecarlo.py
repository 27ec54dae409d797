"""
Monte Carlo Module - Finite-N trial engine for the relay network.

Each trial draws relay positions, attack survivors and Rayleigh fading,
forms the destination signal under the MAC, AF or DF strategy and flags an
outage when the instantaneous rate falls below the target rate.

Every trial owns a random substream derived from (seed, trial index) with
the counter-based Philox generator, so results depend only on the seed and
never on how trials are spread across worker threads.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence

import numpy as np

from .analytic import LN2, SystemParams
from .errors import ConfigError
from .topology import NetworkGeometry, sample_positions

logger = logging.getLogger(__name__)


# ============================================================================
# CONFIGURATION
# ============================================================================

# Trials handed to a worker at a time (also the progress granularity)
CHUNK_SIZE: int = 1000

# Normal quantile of the two-sided 95% interval
Z_95: float = 1.96

SEED_LIMIT: int = 2 ** 64

# The trial index occupies the top 64-bit word of Philox's 256-bit counter
_COUNTER_SHIFT: int = 192

# Placement stream lives on its own key so it never collides with a trial
_PLACEMENT_KEY_BIT: int = 1 << 64

ProgressHook = Callable[[int], None]


class SimStrategy(str, Enum):
    """Relaying strategy simulated by a trial."""
    MAC = "MAC"
    AF = "AF"
    DF = "DF"


# ============================================================================
# DATA CLASSES
# ============================================================================

@dataclass(frozen=True)
class TrialConfig:
    """One Monte Carlo configuration."""
    n_relays: int
    strategy: SimStrategy
    target_rate: float
    trials: int
    seed: int
    params: SystemParams
    geometry: NetworkGeometry
    resample_positions: bool = True

    def __post_init__(self) -> None:
        name = str(getattr(self.strategy, "value", self.strategy)).upper()
        try:
            object.__setattr__(self, "strategy", SimStrategy(name))
        except ValueError:
            raise ConfigError(f"strategy must be MAC, AF or DF, got {name!r}", key="sim.strategy") from None
        if self.n_relays < 1:
            raise ConfigError(f"need at least one relay, got {self.n_relays}", key="sim.n_relays")
        if self.trials < 1:
            raise ConfigError(f"need at least one trial, got {self.trials}", key="sim.trials")
        if not (math.isfinite(self.target_rate) and self.target_rate >= 0):
            raise ConfigError(f"target rate must be non-negative, got {self.target_rate}", key="sim.target_rate")
        if not 0 <= self.seed < SEED_LIMIT:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}", key="sim.seed")
        if self.strategy is not SimStrategy.MAC and self.params.alpha <= 0.0:
            raise ConfigError(f"{self.strategy.value} needs a positive source power fraction", key="system.alpha")


@dataclass(frozen=True)
class TrialOutcome:
    """Everything one trial produced."""
    outage: bool
    rate: float
    forwarding: int          # relays that transmitted (survivors; DF: survivors that decoded)
    sum_power: float         # relay power scheduled before attacks
    signal: complex          # realized coefficient of x at the destination
    forwarding_positions: np.ndarray


@dataclass(frozen=True)
class OutageEstimate:
    """Empirical outage frequency with a normal-approximation 95% interval."""
    outage_freq: float
    trials: int
    ci95_halfwidth: float
    seed: int
    outages: int = 0


@dataclass
class TrialRecord:
    """Per-trial arrays of a run, indexed by trial number."""
    outage: np.ndarray
    rate: np.ndarray
    forwarding: np.ndarray
    sum_power: np.ndarray
    signal: np.ndarray
    positions: Optional[List[np.ndarray]] = field(default=None)

    @classmethod
    def allocate(cls, trials: int, keep_positions: bool) -> "TrialRecord":
        return cls(
            outage=np.zeros(trials, dtype=bool),
            rate=np.zeros(trials),
            forwarding=np.zeros(trials, dtype=np.int64),
            sum_power=np.zeros(trials),
            signal=np.zeros(trials, dtype=complex),
            positions=[np.empty(0)] * trials if keep_positions else None,
        )

    def store(self, index: int, outcome: TrialOutcome) -> None:
        self.outage[index] = outcome.outage
        self.rate[index] = outcome.rate
        self.forwarding[index] = outcome.forwarding
        self.sum_power[index] = outcome.sum_power
        self.signal[index] = outcome.signal
        if self.positions is not None:
            self.positions[index] = outcome.forwarding_positions

    def forwarding_positions(self) -> np.ndarray:
        """All forwarding-relay positions of the run, in trial order."""
        if self.positions is None:
            raise ValueError("positions were not kept for this run")
        return np.concatenate(self.positions) if self.positions else np.empty(0)


# ============================================================================
# RANDOM STREAMS
# ============================================================================

def trial_stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for trial `index` of a run seeded with `seed`."""
    return np.random.Generator(np.random.Philox(key=seed, counter=index << _COUNTER_SHIFT))


def placement_stream(seed: int) -> np.random.Generator:
    """Generator for the relay placement shared by all trials in fixed-placement mode."""
    return np.random.Generator(np.random.Philox(key=seed | _PLACEMENT_KEY_BIT))


def _complex_gaussian(stream: np.random.Generator, n: int) -> np.ndarray:
    # CN(0, 1): independent real and imaginary parts of variance 1/2
    return (stream.standard_normal(n) + 1j * stream.standard_normal(n)) * math.sqrt(0.5)


def _half_duplex_rate(snr: float) -> float:
    return 0.5 * math.log1p(snr) / LN2


# ============================================================================
# TRIALS
# ============================================================================

def simulate_trial(
    cfg: TrialConfig,
    stream: np.random.Generator,
    positions: Optional[np.ndarray] = None,
) -> TrialOutcome:
    """
    Run one trial of cfg.strategy.

    Args:
        cfg: Trial configuration
        stream: Generator owned by this trial
        positions: Fixed relay placement; drawn from the stream when None

    Returns:
        TrialOutcome of the trial
    """
    g, params = cfg.geometry, cfg.params
    n = cfg.n_relays
    gamma0, alpha = params.gamma0, params.alpha

    if positions is None:
        positions = sample_positions(g, n, stream)
    rho_s = g.rho_s(positions)
    rho_d = g.rho_d(positions)
    survive = stream.random(n) >= params.p
    h_rd = _complex_gaussian(stream, n)
    relay_power = (1.0 - alpha) * gamma0 / n

    if cfg.strategy is SimStrategy.MAC:
        signal = complex(np.sum(np.sqrt(relay_power * rho_d[survive]) * h_rd[survive]))
        transmitting = survive
        sum_power = relay_power * n

    elif cfg.strategy is SimStrategy.AF:
        h_sr = _complex_gaussian(stream, n)
        relay_noise = _complex_gaussian(stream, n)
        source_snr = alpha * gamma0 * rho_s
        gain_sq = relay_power / (source_snr + 1.0)
        received = np.sqrt(source_snr) * h_sr + relay_noise
        sum_power = float(np.sum(gain_sq * np.abs(received) ** 2))

        coeff = np.sqrt(gain_sq * source_snr * rho_d)
        signal = complex(np.sum(coeff[survive] * h_sr[survive] * h_rd[survive]))
        noise_power = float(np.sum(gain_sq[survive] * rho_d[survive] * np.abs(h_rd[survive]) ** 2))
        snr = abs(signal) ** 2 / (1.0 + noise_power)
        rate = _half_duplex_rate(snr)
        return TrialOutcome(
            outage=rate < cfg.target_rate,
            rate=rate,
            forwarding=int(np.count_nonzero(survive)),
            sum_power=sum_power,
            signal=signal,
            forwarding_positions=positions[survive],
        )

    else:
        h_sr = _complex_gaussian(stream, n)
        link_rate = 0.5 * np.log1p(alpha * gamma0 * rho_s * np.abs(h_sr) ** 2) / LN2
        decoded = link_rate >= cfg.target_rate
        transmitting = survive & decoded
        signal = complex(np.sum(np.sqrt(relay_power * rho_d[transmitting]) * h_rd[transmitting]))
        sum_power = relay_power * int(np.count_nonzero(decoded))

    rate = _half_duplex_rate(abs(signal) ** 2)
    return TrialOutcome(
        outage=rate < cfg.target_rate,
        rate=rate,
        forwarding=int(np.count_nonzero(transmitting)),
        sum_power=float(sum_power),
        signal=signal,
        forwarding_positions=positions[transmitting],
    )


def run_trial_mac(cfg: TrialConfig, stream: np.random.Generator) -> bool:
    """Outage flag of one MAC cut-set trial."""
    return simulate_trial(_with_strategy(cfg, SimStrategy.MAC), stream).outage


def run_trial_af(cfg: TrialConfig, stream: np.random.Generator) -> bool:
    """Outage flag of one AF trial."""
    return simulate_trial(_with_strategy(cfg, SimStrategy.AF), stream).outage


def run_trial_df(cfg: TrialConfig, stream: np.random.Generator) -> bool:
    """Outage flag of one DF trial."""
    return simulate_trial(_with_strategy(cfg, SimStrategy.DF), stream).outage


def _with_strategy(cfg: TrialConfig, strategy: SimStrategy) -> TrialConfig:
    if cfg.strategy is strategy:
        return cfg
    return TrialConfig(
        n_relays=cfg.n_relays,
        strategy=strategy,
        target_rate=cfg.target_rate,
        trials=cfg.trials,
        seed=cfg.seed,
        params=cfg.params,
        geometry=cfg.geometry,
        resample_positions=cfg.resample_positions,
    )


# ============================================================================
# RUNNER
# ============================================================================

def _run_chunk(
    cfg: TrialConfig,
    start: int,
    stop: int,
    record: TrialRecord,
    placement: Optional[np.ndarray],
) -> int:
    for index in range(start, stop):
        record.store(index, simulate_trial(cfg, trial_stream(cfg.seed, index), placement))
    return stop - start


def run_trials(
    cfg: TrialConfig,
    workers: int = 1,
    keep_positions: bool = False,
    progress: Optional[ProgressHook] = None,
) -> TrialRecord:
    """
    Run all trials of a configuration.

    Args:
        cfg: Trial configuration
        workers: Worker threads (1 runs inline)
        keep_positions: Keep forwarding-relay positions of every trial
        progress: Called with the number of trials finished, chunk by chunk

    Returns:
        TrialRecord indexed by trial number
    """
    if workers < 1:
        raise ConfigError(f"workers must be at least 1, got {workers}", key="sim.workers")

    record = TrialRecord.allocate(cfg.trials, keep_positions)
    placement = None
    if not cfg.resample_positions:
        placement = sample_positions(cfg.geometry, cfg.n_relays, placement_stream(cfg.seed))

    chunks = [(start, min(start + CHUNK_SIZE, cfg.trials)) for start in range(0, cfg.trials, CHUNK_SIZE)]

    if workers == 1:
        for start, stop in chunks:
            done = _run_chunk(cfg, start, stop, record, placement)
            if progress:
                progress(done)
        return record

    # Chunks write disjoint slices of the record
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(_run_chunk, cfg, start, stop, record, placement) for start, stop in chunks]
        for future in as_completed(futures):
            done = future.result()
            if progress:
                progress(done)
    return record


def summarize(record: TrialRecord, seed: int) -> OutageEstimate:
    """Outage frequency and confidence interval of a finished run."""
    trials = int(record.outage.size)
    outages = int(np.count_nonzero(record.outage))
    freq = outages / trials
    return OutageEstimate(
        outage_freq=freq,
        trials=trials,
        ci95_halfwidth=Z_95 * math.sqrt(freq * (1.0 - freq) / trials),
        seed=seed,
        outages=outages,
    )


def estimate_outage(
    cfg: TrialConfig,
    workers: int = 1,
    progress: Optional[ProgressHook] = None,
) -> OutageEstimate:
    """
    Estimate the outage probability of a configuration.

    The estimate is bit-identical for any number of workers.
    """
    record = run_trials(cfg, workers=workers, progress=progress)
    estimate = summarize(record, cfg.seed)
    logger.info(
        f"{cfg.strategy.value} N={cfg.n_relays} R={cfg.target_rate:g}: "
        f"outage {estimate.outage_freq:.4f} +/- {estimate.ci95_halfwidth:.4f} over {cfg.trials} trials"
    )
    return estimate


def sweep_outage(
    cfgs: Sequence[TrialConfig],
    workers: int = 1,
    progress: Optional[ProgressHook] = None,
) -> List[OutageEstimate]:
    """estimate_outage for each configuration, in input order."""
    return [estimate_outage(cfg, workers=workers, progress=progress) for cfg in cfgs]

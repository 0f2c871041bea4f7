import logging
import math
from dataclasses import dataclass

import numpy as np

from core.errors import ConfigError, UnstableQueue
from core.wardrop import EquilibriumFlows
from models.market import MarketParams
from models.simulation import SimConfig

logger = logging.getLogger(__name__)

BATCHES = 20
"""Batches used for the batch-means standard error"""

DEFAULT_Z_THRESHOLD = 3.0


@dataclass(frozen=True)
class SimStats:
    counts: tuple[int, ...]
    """Usual arrivals routed to each CP after warmup"""
    mean_sojourn: tuple[float, ...]
    standard_errors: tuple[float, ...]
    """Batch-means standard error of each mean sojourn"""
    fractions: tuple[float, ...]
    """Empirical routing fraction of each CP"""
    overall_mean: float
    """Mean sojourn over every request sampled"""
    samples: tuple[int, ...]
    """Sojourn samples per CP, exogenous requests included when they queue"""
    service_rates: tuple[float, ...]
    exogenous_counts: tuple[int, ...]


@dataclass(frozen=True)
class TheoryComparison:
    theory: tuple[float, ...]
    """Stationary M/M/1 sojourn `1/(m_i - λ_i)`"""
    z_scores: tuple[float, ...]
    overall_theory: float
    overall_z: float
    threshold: float = DEFAULT_Z_THRESHOLD

    @property
    def passed(self) -> bool:
        return all(abs(z) <= self.threshold for z in (*self.z_scores, self.overall_z) if not math.isnan(z))


def _generator(seed: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def fifo_departures(arrivals: np.ndarray, services: np.ndarray) -> np.ndarray:
    """
    Departure times of a single server FIFO queue

    `d_k = max(a_k, d_{k-1}) + s_k` unrolled as `S_k + max_{j<=k}(a_j - S_{j-1})`
    with `S` the cumulative service.
    """
    work = np.cumsum(services)

    return work + np.maximum.accumulate(arrivals - (work - services))


def _batch_error(sojourns: np.ndarray) -> float:
    if len(sojourns) < 2 * BATCHES:
        return math.nan

    means = np.array([batch.mean() for batch in np.array_split(sojourns, BATCHES)])

    return float(means.std(ddof=1) / math.sqrt(BATCHES))


def simulate(params: MarketParams, flows: EquilibriumFlows, config: SimConfig) -> SimStats:
    """
    Simulate the CP queues under the equilibrium routing

    Usual requests arrive as one Poisson stream of rate `λ` and pick CP `i` with
    probability `λ_i/λ`. Each CP is an M/M/1 FIFO queue with rate `m_i`. Exogenous
    requests of CP `i` form an independent Poisson stream of rate `λ0(1-γ_i)` that
    queues in congesting mode and is only counted otherwise.

    Random streams come from `SeedSequence(seed).spawn(2 + 2N)` fed to PCG64, in the
    order interarrival, routing, service per CP, exogenous per CP.
    """

    size = params.size

    if len(flows.rates) != size:
        raise ConfigError(f"flows describe {len(flows.rates)} CPs, market has {size}")

    warmup = math.floor(config.warmup_fraction * config.horizon)

    if config.horizon - warmup < 1:
        raise ConfigError("no arrival left after warmup")

    loads = flows.queue_rates
    for index, (m, load) in enumerate(zip(params.capacities, loads), start=1):
        if load >= m:
            raise UnstableQueue(f"CP {index} receives {load:g} requests per unit time with service rate {m:g}")

    streams = np.random.SeedSequence(config.seed).spawn(2 + 2 * size)
    interarrival, routing = _generator(streams[0]), _generator(streams[1])
    service = [_generator(s) for s in streams[2 : 2 + size]]
    outside = [_generator(s) for s in streams[2 + size :]]

    total = sum(flows.rates)
    times = np.cumsum(interarrival.exponential(1.0 / total, config.horizon))
    choice = routing.choice(size, size=config.horizon, p=np.asarray(flows.rates) / total)
    start, end = times[warmup], times[-1]
    congesting = flows.exogenous_mode == "congesting"

    counts, means, errors, samples, exogenous_counts = [], [], [], [], []
    pooled = []

    for i in range(size):
        index = np.flatnonzero(choice == i)
        arrivals = times[index]
        kept = index >= warmup

        extra_rate = params.exogenous_rate * (1 - flows.gammas[i])
        extra = np.empty(0)
        if extra_rate > 0:
            extra = np.sort(outside[i].uniform(0.0, end, outside[i].poisson(extra_rate * end)))
        exogenous_counts.append(int(np.count_nonzero(extra >= start)))

        if congesting and len(extra):
            merged = np.concatenate((arrivals, extra))
            order = np.argsort(merged, kind="stable")
            arrivals = merged[order]
            kept = np.concatenate((kept, extra >= start))[order]

        departures = fifo_departures(arrivals, service[i].exponential(1.0 / params.capacities[i], len(arrivals)))
        sojourns = (departures - arrivals)[kept]

        counts.append(int(np.count_nonzero(index >= warmup)))
        samples.append(len(sojourns))
        means.append(float(sojourns.mean()) if len(sojourns) else math.nan)
        errors.append(_batch_error(sojourns))
        pooled.append(sojourns)

    everything = np.concatenate(pooled)
    observed = sum(counts)

    logger.debug("simulated %d arrivals, %d kept after warmup", config.horizon, observed)

    return SimStats(
        counts=tuple(counts),
        mean_sojourn=tuple(means),
        standard_errors=tuple(errors),
        fractions=tuple(count / observed for count in counts),
        overall_mean=float(everything.mean()),
        samples=tuple(samples),
        service_rates=params.capacities,
        exogenous_counts=tuple(exogenous_counts),
    )


def asymptotic_error(m: float, rate: float, samples: int) -> float:
    """Standard error of an M/M/1 mean sojourn estimated from `samples` consecutive requests"""
    load = rate / m

    return math.sqrt(2 * load * (1 + load) / ((1 - load) ** 4 * m * rate * samples))


def compare_to_theory(
    stats: SimStats, flows: EquilibriumFlows, z_threshold: float = DEFAULT_Z_THRESHOLD
) -> TheoryComparison:
    """
    z-scores of the simulated sojourns against the stationary M/M/1 values

    Each CP uses the larger of its batch-means error and the asymptotic M/M/1
    error, batch means being too optimistic when the run is short next to the
    relaxation time of a heavily loaded queue.
    """

    theory, scores, weights, spreads = [], [], [], []
    sampled = sum(stats.samples)

    for m, rate, mean, error, samples in zip(
        flows.capacities, flows.queue_rates, stats.mean_sojourn, stats.standard_errors, stats.samples
    ):
        expected = 1.0 / (m - rate) if rate > 0 else math.nan
        theory.append(expected)

        if samples == 0 or rate <= 0:
            scores.append(math.nan)
            continue

        spread = float(np.fmax(error, asymptotic_error(m, rate, samples)))
        scores.append(0.0 if mean == expected else (mean - expected) / spread)
        weights.append(samples / sampled)
        spreads.append(spread)

    queue_total = sum(rate for rate in flows.queue_rates if rate > 0)
    overall_theory = sum(
        rate / queue_total * value for rate, value in zip(flows.queue_rates, theory) if rate > 0
    )
    overall_spread = math.sqrt(sum((w * s) ** 2 for w, s in zip(weights, spreads)))
    overall_z = 0.0 if stats.overall_mean == overall_theory else (stats.overall_mean - overall_theory) / overall_spread

    return TheoryComparison(
        theory=tuple(theory),
        z_scores=tuple(scores),
        overall_theory=overall_theory,
        overall_z=overall_z,
        threshold=z_threshold,
    )

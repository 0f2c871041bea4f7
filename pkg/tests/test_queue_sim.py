import math

import numpy as np
import pytest

from core.delay import flows_delay
from core.errors import ConfigError, UnstableQueue
from core.queue_sim import SimStats, asymptotic_error, compare_to_theory, fifo_departures, simulate
from core.wardrop import solve_wardrop, solve_wardrop_n_cp
from models.market import MarketParams, SponsorshipProfile
from models.simulation import SimConfig


@pytest.fixture
def benchmark(market):
    return market, solve_wardrop(market, SponsorshipProfile(gammas=(0, 1)))


def test_fifo_departures_by_hand():
    arrivals = np.array([0.0, 1.0, 1.5, 5.0])
    services = np.array([2.0, 1.0, 0.5, 1.0])

    np.testing.assert_allclose(fifo_departures(arrivals, services), [2.0, 3.0, 3.5, 6.0])


def test_single_queue_mean_sojourn():
    rng = np.random.default_rng(7)
    n = 1_000_000
    arrivals = np.cumsum(rng.exponential(1.0, n))
    sojourns = fifo_departures(arrivals, rng.exponential(0.5, n)) - arrivals
    kept = sojourns[n // 10 :]

    assert abs(kept.mean() - 1.0) < 3 * asymptotic_error(2.0, 1.0, len(kept))


def test_simulation_matches_theory(benchmark):
    market, flows = benchmark
    stats = simulate(market, flows, SimConfig(horizon=1_000_000, seed=20240601))
    comparison = compare_to_theory(stats, flows)

    assert comparison.passed
    assert all(abs(z) < 3 for z in comparison.z_scores)
    assert abs(comparison.overall_z) < 3
    assert comparison.overall_theory == pytest.approx(flows_delay(market, flows), rel=1e-12)
    assert comparison.theory[1] == pytest.approx(1 / (900 - flows.rates[1]))


def test_simulation_counts_and_routing(benchmark):
    market, flows = benchmark
    config = SimConfig(horizon=200_000, seed=11, warmup_fraction=0.25)
    stats = simulate(market, flows, config)
    kept = config.horizon - math.floor(config.warmup_fraction * config.horizon)

    assert sum(stats.counts) == kept
    assert stats.samples == stats.counts
    assert sum(stats.fractions) == pytest.approx(1.0)

    for fraction, rate in zip(stats.fractions, flows.rates):
        p = rate / market.total_rate
        assert abs(fraction - p) < 4 * math.sqrt(p * (1 - p) / kept)


def test_simulation_is_deterministic(benchmark):
    market, flows = benchmark
    config = SimConfig(horizon=50_000, seed=3)

    assert simulate(market, flows, config) == simulate(market, flows, config)
    assert simulate(market, flows, config) != simulate(market, flows, config.model_copy(update={"seed": 4}))


def test_unstable_queue_is_rejected(benchmark):
    market, flows = benchmark

    with pytest.raises(UnstableQueue):
        simulate(market.model_copy(update={"capacities": (600, 900)}), flows, SimConfig(horizon=1000))


def test_mismatched_flows_are_rejected(market):
    three = MarketParams(capacities=(500, 600, 700), total_rate=1500, access_price=0.0)
    flows = solve_wardrop_n_cp(three, SponsorshipProfile(gammas=(1, 1, 1)))

    with pytest.raises(ConfigError):
        simulate(market, flows, SimConfig(horizon=1000))


def test_noncongesting_exogenous_traffic_is_only_counted(benchmark):
    market, _ = benchmark
    params = market.model_copy(update={"exogenous_rate": 100})
    flows = solve_wardrop(params, SponsorshipProfile(gammas=(0, 1)))
    stats = simulate(params, flows, SimConfig(horizon=100_000, seed=5))

    assert stats.samples == stats.counts
    assert stats.exogenous_counts[1] == 0
    assert stats.exogenous_counts[0] > 0


def test_congesting_exogenous_traffic_queues(market):
    params = market.model_copy(update={"exogenous_rate": 100, "exogenous_mode": "congesting"})
    flows = solve_wardrop(params, SponsorshipProfile(gammas=(0, 0)))
    stats = simulate(params, flows, SimConfig(horizon=400_000, seed=9))
    comparison = compare_to_theory(stats, flows)

    assert all(s == c + e for s, c, e in zip(stats.samples, stats.counts, stats.exogenous_counts))
    assert comparison.theory == pytest.approx((1 / (700 - 600), 1 / (900 - 800)))
    assert comparison.passed


def synthetic(flows, means, overall) -> SimStats:
    return SimStats(
        counts=(500_000, 400_000),
        mean_sojourn=means,
        standard_errors=(0.01, 0.0001),
        fractions=(5 / 9, 4 / 9),
        overall_mean=overall,
        samples=(500_000, 400_000),
        service_rates=flows.capacities,
        exogenous_counts=(0, 0),
    )


def test_perfect_agreement(benchmark):
    _, flows = benchmark
    theory = tuple(1 / (m - rate) for m, rate in zip(flows.capacities, flows.rates))
    overall = sum(rate / 1200 * t for rate, t in zip(flows.rates, theory))
    comparison = compare_to_theory(synthetic(flows, theory, overall), flows)

    assert comparison.z_scores == (0.0, 0.0)
    assert abs(comparison.overall_z) < 1e-9
    assert comparison.passed


def test_faster_service_fails_comparison(benchmark):
    market, flows = benchmark
    faster = market.model_copy(update={"capacities": (1400, 1800)})
    stats = simulate(faster, flows, SimConfig(horizon=200_000, seed=1))
    comparison = compare_to_theory(stats, flows, z_threshold=3)

    assert not comparison.passed
    assert all(z < 0 for z in comparison.z_scores)
    assert comparison.overall_z < 0

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from core.errors import AssumptionViolation, PreconditionViolation
from core.wardrop import EquilibriumFlows, ensure_assumptions, solve_wardrop
from models.market import MarketParams, SponsorshipProfile

logger = logging.getLogger(__name__)

DEFAULT_PRICE_GRID = np.geomspace(1e-4, 10.0, 200)
"""Log-spaced access prices used when no grid is given"""

CROSSING_TOLERANCE = 1e-12
"""Relative gap to the neutral delay below which a point counts as on the baseline"""


@dataclass(frozen=True)
class DelayCurve:
    prices: tuple[float, ...]
    delays: tuple[float, ...]
    baseline: float
    """Delay of the neutral profile, constant in the price"""
    threshold_price: float | None = None
    """Price where the curve crosses the baseline upward"""


def flows_delay(params: MarketParams, flows: EquilibriumFlows) -> float:
    """Mean sojourn time of a request given the equilibrium flows"""

    rates = flows.queue_rates
    total = flows.total_effective if flows.exogenous_mode == "congesting" else flows.total_rate

    return sum(rate / total / (m - rate) for m, rate in zip(params.capacities, rates) if rate > 0)


def mean_delay(params: MarketParams, profile: SponsorshipProfile) -> float:
    return flows_delay(params, solve_wardrop(params, profile))


def mean_delay_closed_form(params: MarketParams, profile: SponsorshipProfile) -> float:
    """
    Two CP delay from the equilibrium cost alone

    `(α Σ m_i - c Σ m_i γ_i - 2) / λ`, with `λ̃` in place of `λ` in congesting mode.
    """

    if params.size != 2:
        raise PreconditionViolation(f"closed form delay needs exactly 2 CPs, got {params.size}")

    flows = solve_wardrop(params, profile)
    c = params.access_price
    weighted = sum(m * g for m, g in zip(params.capacities, profile.gammas))
    total = flows.total_effective if params.exogenous_mode == "congesting" else params.total_rate

    return (flows.alpha * sum(params.capacities) - c * weighted - 2) / total


def neutral_delay(params: MarketParams) -> float:
    """Delay when no CP sponsors"""
    return mean_delay(params, SponsorshipProfile.uniform(params.size, 1.0))


def _check_two_cp_prices(params: MarketParams) -> None:
    if params.size != 2:
        raise PreconditionViolation(f"price analysis needs exactly 2 CPs, got {params.size}")
    if params.exogenous_mode == "congesting" and params.exogenous_rate > 0:
        raise PreconditionViolation("price analysis assumes exogenous traffic stays out of the queues")

    ensure_assumptions(params)


def delay_threshold_price(params: MarketParams, gamma1: float, gamma2: float) -> float | None:
    """
    Price above which differential pricing is slower than the neutral regime

    Only exists when CP 2, the larger one, is subsidised less. Otherwise the delay
    is never below the neutral delay and `None` is returned.
    """

    _check_two_cp_prices(params)

    if gamma2 <= gamma1:
        return None

    m1, m2 = params.capacities

    return (m2 / m1 - m1 / m2) / (params.excess_capacity * (gamma2 - gamma1))


def delay_minimizing_price(params: MarketParams, gamma1: float, gamma2: float) -> float | None:
    """Price minimising the convex delay curve, `None` when the curve is nondecreasing"""

    _check_two_cp_prices(params)

    if gamma2 <= gamma1:
        return None

    m1, m2 = params.capacities

    return (math.sqrt(m2 / m1) - math.sqrt(m1 / m2)) / (params.excess_capacity * (gamma2 - gamma1))


def delay_vs_price_curve(
    params: MarketParams,
    profile: SponsorshipProfile,
    price_grid: np.ndarray | list[float] | None = None,
) -> DelayCurve:
    prices = DEFAULT_PRICE_GRID if price_grid is None else np.asarray(price_grid, dtype=float)

    if prices.ndim != 1 or len(prices) == 0:
        raise PreconditionViolation("price grid must be a nonempty list")
    if np.any(prices < 0) or np.any(np.diff(prices) <= 0):
        raise PreconditionViolation("price grid must be nonnegative and strictly increasing")

    def delay_at(price: float) -> float:
        priced = params.model_copy(update={"access_price": float(price)})
        try:
            return mean_delay(priced, profile)
        except AssumptionViolation as e:
            raise AssumptionViolation(f"at access price {price:g}: {e}", e.report) from e

    delays = np.array([delay_at(price) for price in prices])
    baseline = neutral_delay(params)
    gap = delays - baseline
    below = gap < -CROSSING_TOLERANCE * baseline

    threshold = None
    crossings = np.flatnonzero(below[:-1] & ~below[1:])

    if len(crossings):
        k = int(crossings[0])
        if gap[k + 1] <= 0:
            threshold = float(prices[k + 1])
        else:
            threshold = float(
                optimize.bisect(lambda price: delay_at(price) - baseline, prices[k], prices[k + 1], xtol=1e-15)
            )
        logger.debug("delay curve crosses the neutral delay at c=%.6g", threshold)

    return DelayCurve(
        prices=tuple(float(price) for price in prices),
        delays=tuple(float(delay) for delay in delays),
        baseline=baseline,
        threshold_price=threshold,
    )

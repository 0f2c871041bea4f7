import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from core.errors import AssumptionViolation, NoConvergence, PreconditionViolation
from models.market import DuopolyParams, ExogenousMode, MarketBase, MarketParams, SponsorshipProfile

logger = logging.getLogger(__name__)

INFINITE_COST = math.inf
"""Cost of a CP loaded at or above its service rate"""

MAX_ITERATIONS = 200
"""Bisection iteration cap"""

BRACKET_EXPANSIONS = 60
"""Doublings of the upper bracket before giving up"""

FLOW_TOLERANCE = 1e-10
"""Flow residual tolerance, relative to the total rate"""


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[tuple[str, str], ...] = ()
    """(assumption id, message) pairs"""

    @property
    def passed(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.passed:
            return "all assumptions hold"

        return "; ".join(f"{key}: {message}" for key, message in self.violations)


@dataclass(frozen=True)
class EquilibriumFlows:
    rates: tuple[float, ...]
    """Usual equilibrium rate `λ_i*` per CP"""
    alpha: float
    """Equilibrium cost"""
    effective_rates: tuple[float, ...]
    """`λ_i* + λ0(1-γ_i)` per CP"""
    total_effective: float
    """`λ + Σ λ0(1-γ_i)`"""
    gammas: tuple[float, ...]
    exogenous_mode: ExogenousMode = "noncongesting"
    capacities: tuple[float, ...] = ()
    """Service rate `m_i` of each CP"""

    @property
    def total_rate(self) -> float:
        return sum(self.rates)

    @property
    def queue_rates(self) -> tuple[float, ...]:
        """Arrival rate each CP queue actually serves"""
        return self.effective_rates if self.exogenous_mode == "congesting" else self.rates


def validate_assumptions(params: MarketBase) -> ValidationReport:
    """Check A1-A3, sign constraints and the exogenous capacity conditions"""

    violations: list[tuple[str, str]] = []
    m = params.capacities
    lam = params.total_rate
    lam0 = params.exogenous_rate

    if lam <= 0:
        violations.append(("positivity", f"total rate must be positive, got {lam}"))
    if any(capacity <= 0 for capacity in m):
        violations.append(("positivity", f"capacities must be positive, got {list(m)}"))
    if any(price < 0 for price in params.prices):
        violations.append(("positivity", f"access prices must be nonnegative, got {list(params.prices)}"))
    if not 0 < params.repayment <= 1:
        violations.append(("positivity", f"repayment must lie in (0, 1], got {params.repayment}"))
    if params.ad_rate <= 0:
        violations.append(("positivity", f"ad rate must be positive, got {params.ad_rate}"))
    if lam0 < 0:
        violations.append(("positivity", f"exogenous rate must be nonnegative, got {lam0}"))

    if sum(m) <= lam:
        violations.append(("A1", f"total capacity {sum(m):g} must exceed the total rate {lam:g}"))

    for index, capacity in enumerate(m, start=1):
        if capacity > lam:
            violations.append(("A2", f"capacity m_{index}={capacity:g} exceeds the total rate {lam:g}"))

    if not (m[0] < m[1] and all(a <= b for a, b in zip(m[1:], m[2:]))):
        violations.append(("A3", f"capacities must satisfy m_1 < m_2 <= ... <= m_N, got {list(m)}"))
    if m[0] <= lam / len(m):
        violations.append(("A3", f"m_1={m[0]:g} must exceed λ/N={lam / len(m):g}"))

    if lam0 > 0:
        if params.excess_capacity <= 2 * lam0:
            violations.append(
                ("exogenous", f"excess capacity {params.excess_capacity:g} must exceed 2λ0={2 * lam0:g}")
            )
        if any(capacity <= lam0 for capacity in m):
            violations.append(("exogenous", f"every capacity must exceed λ0={lam0:g}"))

    if isinstance(params, DuopolyParams) and not params.access_prices[0] < params.access_prices[1]:
        violations.append(("price-order", f"ISP 1 must be cheaper, got c1={params.access_prices[0]:g}"))

    return ValidationReport(tuple(violations))


def ensure_assumptions(params: MarketBase, waive: tuple[str, ...] = ()) -> None:
    """Raise on every violation except those of the `waive`d assumption ids"""
    report = validate_assumptions(params)
    report = ValidationReport(tuple(v for v in report.violations if v[0] not in waive))

    if not report.passed:
        raise AssumptionViolation(report.summary(), report)


def user_cost(x: float, m: float, c: float, gamma: float) -> float:
    """Delay plus subsidised price of a user served by a CP receiving rate `x`"""
    if m > x:
        return 1.0 / (m - x) + gamma * c

    return INFINITE_COST


def queue_capacities(params: MarketBase, gammas: tuple[float, ...]) -> tuple[float, ...]:
    """Capacities left for usual traffic"""
    if params.exogenous_mode == "congesting":
        return tuple(m - params.exogenous_rate * (1 - g) for m, g in zip(params.capacities, gammas))

    return params.capacities


def excess_capacity(params: MarketBase, profile: SponsorshipProfile | None = None) -> float:
    """Excess capacity seen by usual traffic"""
    if profile is None:
        return params.excess_capacity

    return sum(queue_capacities(params, profile.gammas)) - params.total_rate


def two_cp_split(m1, m2, total, p1, p2):
    """
    Closed form two CP equilibrium for effective prices `p1`, `p2`

    Works elementwise on numpy arrays. Returns `(alpha, rate1, rate2)`. The larger
    root of the quadratic in alpha is taken; `alpha - p_i` is evaluated without
    cancellation.
    """
    inv = 1.0 / (m1 + m2 - total)
    half_gap = (p2 - p1) / 2
    root = np.hypot(half_gap, inv)

    def shift(diff):
        return inv + np.where(diff >= 0, diff + root, inv * inv / (root - diff))

    shift1 = shift(half_gap)
    shift2 = shift(-half_gap)

    return p1 + shift1, m1 - 1.0 / shift1, m2 - 1.0 / shift2


def _flows(
    params: MarketBase, gammas: tuple[float, ...], rates: tuple[float, ...], alpha: float
) -> EquilibriumFlows:
    exogenous = tuple(params.exogenous_rate * (1 - g) for g in gammas)

    return EquilibriumFlows(
        rates=rates,
        alpha=alpha,
        effective_rates=tuple(rate + extra for rate, extra in zip(rates, exogenous)),
        total_effective=params.total_rate + sum(exogenous),
        gammas=gammas,
        exogenous_mode=params.exogenous_mode,
        capacities=params.capacities,
    )


def _check_profile(params: MarketBase, profile: SponsorshipProfile) -> None:
    if len(profile.gammas) != params.size:
        raise PreconditionViolation(f"profile has {len(profile.gammas)} subsidy factors for {params.size} CPs")


def solve_wardrop_two_cp(params: MarketParams, profile: SponsorshipProfile) -> EquilibriumFlows:
    """Closed form Wardrop split between two CPs"""

    if params.size != 2:
        raise PreconditionViolation(f"closed form needs exactly 2 CPs, got {params.size}")

    _check_profile(params, profile)
    ensure_assumptions(params)

    g1, g2 = profile.gammas
    m1, m2 = queue_capacities(params, profile.gammas)
    c = params.access_price
    alpha, rate1, rate2 = two_cp_split(m1, m2, params.total_rate, g1 * c, g2 * c)

    assert alpha > max(g1, g2) * c, "equilibrium cost below a subsidised price"

    return _flows(params, profile.gammas, (float(rate1), float(rate2)), float(alpha))


def solve_wardrop_n_cp(params: MarketParams, profile: SponsorshipProfile) -> EquilibriumFlows:
    """
    Wardrop split among N CPs by bisection on the equilibrium cost

    Supplied flow `Σ max(0, m_i - 1/(α - γ_i c))` is nondecreasing in α, CPs whose empty
    system cost `1/m_i + γ_i c` is at least α receive nothing.
    """

    _check_profile(params, profile)

    m = np.asarray(queue_capacities(params, profile.gammas), dtype=float)
    prices = np.asarray(profile.gammas, dtype=float) * params.access_price
    total = params.total_rate
    usable = m > 0
    slack = float(m[usable].sum()) - total

    if total <= 0 or slack <= 0:
        raise AssumptionViolation(
            f"total capacity {m[usable].sum():g} must exceed the total rate {total:g}",
            ValidationReport((("A1", "total capacity does not exceed the total rate"),)),
        )

    def supplied(alpha: float) -> np.ndarray:
        excess = alpha - prices
        active = usable & (excess * m > 1.0)
        return np.where(active, m - 1.0 / np.where(active, excess, 1.0), 0.0)

    def residual(alpha: float) -> float:
        return float(supplied(alpha).sum()) - total

    low = float(np.min(prices[usable] + 1.0 / m[usable]))
    span = params.size / slack
    high = float(np.max(prices)) + span

    # rounding can leave the exact upper bound a hair short of the root
    for _ in range(BRACKET_EXPANSIONS):
        if residual(high) >= 0.0:
            break
        span *= 2.0
        high = float(np.max(prices)) + span
    else:
        raise NoConvergence(f"no upper bracket for the equilibrium cost below {high:g}")

    if residual(high) == 0.0:
        alpha, iterations = high, 0
    else:
        try:
            alpha, result = optimize.bisect(
                residual,
                low,
                high,
                xtol=1e-300,
                rtol=4 * np.finfo(float).eps,
                maxiter=MAX_ITERATIONS,
                full_output=True,
                disp=False,
            )
        except ValueError as e:
            raise NoConvergence(f"bisection bracket [{low:g}, {high:g}] rejected: {e}") from e

        if not result.converged:
            raise NoConvergence(f"bisection stopped after {result.iterations} iterations")

        iterations = result.iterations

    rates = supplied(alpha)
    error = abs(float(rates.sum()) - total)

    logger.debug("bisection converged in %d iterations, flow residual %.3g", iterations, error)

    if error > FLOW_TOLERANCE * total:
        raise NoConvergence(f"flow residual {error:.3g} above tolerance after {iterations} iterations")

    return _flows(params, profile.gammas, tuple(float(rate) for rate in rates), float(alpha))


def solve_wardrop(params: MarketParams, profile: SponsorshipProfile) -> EquilibriumFlows:
    if params.size == 2:
        return solve_wardrop_two_cp(params, profile)

    ensure_assumptions(params)

    return solve_wardrop_n_cp(params, profile)


def isp_revenue(params: MarketParams, profile: SponsorshipProfile) -> float:
    """Revenue collected from users and repaying CPs"""
    flows = solve_wardrop(params, profile)
    c = params.access_price

    return sum(
        (g + params.repayment * (1 - g)) * c * rate for g, rate in zip(profile.gammas, flows.effective_rates)
    )

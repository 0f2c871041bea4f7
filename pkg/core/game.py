import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from core.errors import PreconditionViolation
from core.wardrop import ensure_assumptions, solve_wardrop, solve_wardrop_two_cp, two_cp_split
from models.actions import DiscreteAction
from models.market import MarketParams, SponsorshipProfile

logger = logging.getLogger(__name__)

DiscreteProfile = tuple[DiscreteAction, DiscreteAction]

PROFILES: tuple[DiscreteProfile, ...] = tuple(itertools.product(DiscreteAction, repeat=2))
"""(S,S), (S,N), (N,S), (N,N)"""

BEST_RESPONSE_TOLERANCE = 1e-9
"""Relative distance to the maximum utility still counted as a best response"""

PNE_TOLERANCE = 1e-6
"""Relative ε of the continuous ε-PNE search"""

NASH_GAIN_TOLERANCE = 1e-12
"""Absolute deviation gain needed to break a discrete equilibrium"""

DISCONTINUITY_JUMP = 0.1
"""Jump of the best response between neighbouring grid points counted as a discontinuity"""


@dataclass(frozen=True)
class GameTable2x2:
    utilities: dict[DiscreteProfile, tuple[float, float]]
    """`(U1, U2)` per action profile"""
    alphas: dict[str, float]
    """Equilibrium cost keyed `00`, `11`, `01`, `10`"""
    effective_rates: dict[DiscreteProfile, tuple[float, float]] = field(default_factory=dict)
    """`(λ̃1, λ̃2)` per action profile"""


@dataclass(frozen=True)
class PneReport:
    lower: float
    """Threshold `A`: (S,S) is an equilibrium up to it"""
    upper: float
    """Threshold `B`: (N,N) is an equilibrium from it on"""
    ratio: float
    """`ρ/β`"""
    pne_set: frozenset[DiscreteProfile]

    @property
    def inverted(self) -> bool:
        """`A > B`: (S,S) and (N,N) coexist for `B <= ρ/β <= A`"""
        return self.lower > self.upper


@dataclass(frozen=True)
class BestResponseCurve:
    opponent_gammas: np.ndarray
    responses: tuple[np.ndarray, ...]
    """Maximising subsidy factors per opponent grid point"""
    discontinuities: tuple[float, ...]
    """Opponent subsidy factors right after which the best response jumps"""


def to_profile(actions: DiscreteProfile) -> SponsorshipProfile:
    return SponsorshipProfile(gammas=tuple(action.gamma for action in actions))


def profile_key(actions: DiscreteProfile) -> str:
    return "".join("0" if action is DiscreteAction.S else "1" for action in actions)


def profile_label(actions: DiscreteProfile) -> str:
    return "(" + ",".join(action.value for action in actions) + ")"


def margin(params: MarketParams, gamma: float) -> float:
    """Revenue per unit of traffic left to a CP after repaying the ISP"""
    return params.ad_rate - (1 - gamma) * params.repayment * params.access_price


def cp_utility(params: MarketParams, profile: SponsorshipProfile, index: int) -> float:
    """Utility of the CP at `index` (0 based); exogenous traffic counts once attracted"""
    flows = solve_wardrop(params, profile)

    return margin(params, profile.gammas[index]) * flows.effective_rates[index]


def utility_dominance(params: MarketParams, profile: SponsorshipProfile) -> tuple[bool, float]:
    """
    Whether CP 1 earns at least as much as CP 2

    Returns the verdict and the rate CP 1 must reach for it,
    `λ̃ / (k + 1)` with `k` the ratio of the two per-unit margins.
    """

    if params.size != 2:
        raise PreconditionViolation(f"dominance compares exactly 2 CPs, got {params.size}")

    burden = params.repayment * params.access_price / params.ad_rate

    if burden > 1:
        raise PreconditionViolation(f"ρc/β={burden:g} must not exceed 1")

    flows = solve_wardrop(params, profile)
    margin1, margin2 = (margin(params, g) for g in profile.gammas)
    threshold = 0.0 if margin2 == 0 else flows.total_effective / (margin1 / margin2 + 1)
    utility1, utility2 = (m * rate for m, rate in zip((margin1, margin2), flows.effective_rates))

    return utility1 >= utility2, threshold


def utility_grid(params: MarketParams, gamma1, gamma2) -> tuple[np.ndarray, np.ndarray]:
    """Both CP utilities for broadcastable arrays of subsidy factors"""

    if params.size != 2:
        raise PreconditionViolation(f"continuous game needs exactly 2 CPs, got {params.size}")

    # A2 alone keeps both rates positive, heavy-load markets with m_1 <= λ/2 stay playable
    ensure_assumptions(params, waive=("A3",))

    g1 = np.asarray(gamma1, dtype=float)
    g2 = np.asarray(gamma2, dtype=float)
    m1, m2 = params.capacities
    c = params.access_price
    extra1 = params.exogenous_rate * (1 - g1)
    extra2 = params.exogenous_rate * (1 - g2)

    if params.exogenous_mode == "congesting":
        _, rate1, rate2 = two_cp_split(m1 - extra1, m2 - extra2, params.total_rate, g1 * c, g2 * c)
    else:
        _, rate1, rate2 = two_cp_split(m1, m2, params.total_rate, g1 * c, g2 * c)

    rate1 = np.where(rate1 >= 0, rate1, np.nan)
    rate2 = np.where(rate2 >= 0, rate2, np.nan)

    return margin(params, g1) * (rate1 + extra1), margin(params, g2) * (rate2 + extra2)


def utility_surface(params: MarketParams, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """`(U1, U2)` matrices indexed `[γ1 index, γ2 index]`"""
    grid = np.asarray(grid, dtype=float)

    return utility_grid(params, grid[:, None], grid[None, :])


def _maximisers(utility: np.ndarray, grid: np.ndarray) -> np.ndarray:
    valid = np.isfinite(utility)

    if not valid.all():
        logger.info("excluded %d subsidy factors without a feasible split", int((~valid).sum()))

    best = np.max(utility[valid])

    return grid[valid & (utility >= best - BEST_RESPONSE_TOLERANCE * abs(best))]


def _grid(grid_size: int) -> np.ndarray:
    if grid_size < 2:
        raise PreconditionViolation(f"grid needs at least 2 points, got {grid_size}")

    return np.linspace(0.0, 1.0, grid_size)


def best_response(params: MarketParams, opponent_gamma: float, which_cp: int, grid_size: int) -> np.ndarray:
    """Subsidy factors of CP `which_cp` (0 based) maximising its utility against `opponent_gamma`"""

    grid = _grid(grid_size)

    match which_cp:
        case 0:
            utility, _ = utility_grid(params, grid, opponent_gamma)
        case 1:
            _, utility = utility_grid(params, opponent_gamma, grid)
        case _:
            raise PreconditionViolation(f"CP index must be 0 or 1, got {which_cp}")

    return _maximisers(utility, grid)


def best_response_curve(params: MarketParams, which_cp: int, grid_size: int) -> BestResponseCurve:
    grid = _grid(grid_size)
    utility1, utility2 = utility_surface(params, grid)

    match which_cp:
        case 0:
            responses = tuple(_maximisers(utility1[:, j], grid) for j in range(grid_size))
        case 1:
            responses = tuple(_maximisers(utility2[i, :], grid) for i in range(grid_size))
        case _:
            raise PreconditionViolation(f"CP index must be 0 or 1, got {which_cp}")

    tops = np.array([response.max() for response in responses])
    jumps = np.flatnonzero(np.abs(np.diff(tops)) > DISCONTINUITY_JUMP)

    return BestResponseCurve(
        opponent_gammas=grid,
        responses=responses,
        discontinuities=tuple(float(grid[k]) for k in jumps),
    )


def find_continuous_pne(params: MarketParams, grid_size: int) -> list[tuple[float, float]]:
    """
    Grid profiles where each subsidy factor is an ε-best response to the other

    An empty result means no equilibrium at this resolution, not a proof of nonexistence.
    """

    grid = _grid(grid_size)
    utility1, utility2 = utility_surface(params, grid)

    best1 = np.nanmax(utility1, axis=0, keepdims=True)
    best2 = np.nanmax(utility2, axis=1, keepdims=True)
    stable = (utility1 >= best1 - PNE_TOLERANCE * np.abs(best1)) & (
        utility2 >= best2 - PNE_TOLERANCE * np.abs(best2)
    )

    return [(float(grid[i]), float(grid[j])) for i, j in np.argwhere(stable)]


def discrete_game_table(params: MarketParams) -> GameTable2x2:
    """
    Utilities of the sponsor / not sponsor game

    Equilibrium costs follow the two CP closed form, in non-congesting mode
    `α00 = 2/m̄`, `α11 = c + 2/m̄` and `α01 = α10 = c/2 + 1/m̄ + sqrt(c²/4 + 1/m̄²)`.
    Congesting mode replaces `m̄` by `m̄ - 2λ0` in `α00` and by `m̄ - λ0` in `α01`.
    """

    if params.size != 2:
        raise PreconditionViolation(f"discrete game needs exactly 2 CPs, got {params.size}")

    utilities = {}
    rates = {}
    alphas = {}

    for actions in PROFILES:
        flows = solve_wardrop_two_cp(params, to_profile(actions))
        rates[actions] = flows.effective_rates
        alphas[profile_key(actions)] = flows.alpha
        utilities[actions] = tuple(
            margin(params, action.gamma) * rate for action, rate in zip(actions, flows.effective_rates)
        )

    return GameTable2x2(utilities=utilities, alphas=alphas, effective_rates=rates)


def _switch_threshold(table: GameTable2x2, player: int, opponent: DiscreteAction, price: float) -> float:
    """Largest `ρ/β` at which `player` still prefers S against `opponent`"""

    def profile(own: DiscreteAction) -> DiscreteProfile:
        return (own, opponent) if player == 0 else (opponent, own)

    sponsored = table.effective_rates[profile(DiscreteAction.S)][player]
    unsponsored = table.effective_rates[profile(DiscreteAction.N)][player]

    return (sponsored - unsponsored) / (price * sponsored)


def classify_pne(params: MarketParams) -> PneReport:
    if params.access_price <= 0:
        raise PreconditionViolation("equilibrium thresholds need a positive access price")

    table = discrete_game_table(params)
    c = params.access_price
    S, N = DiscreteAction.S, DiscreteAction.N
    ratio = params.repayment / params.ad_rate

    lower = min(_switch_threshold(table, 0, S, c), _switch_threshold(table, 1, S, c))
    upper = max(_switch_threshold(table, 0, N, c), _switch_threshold(table, 1, N, c))

    pne: set[DiscreteProfile] = set()
    if ratio <= lower:
        pne.add((S, S))
    if ratio >= upper:
        pne.add((N, N))
    if lower <= ratio <= upper:
        pne.add((S, N))

    report = PneReport(lower=lower, upper=upper, ratio=ratio, pne_set=frozenset(pne))

    if report.inverted:
        logger.warning("threshold interval inverted, A=%.6g > B=%.6g", lower, upper)
    if _switch_threshold(table, 0, S, c) <= ratio <= _switch_threshold(table, 1, N, c):
        logger.warning("(N,S) also meets its equilibrium conditions at ρ/β=%.6g", ratio)

    return report


def brute_force_pne(table: GameTable2x2) -> set[DiscreteProfile]:
    """Profiles where no CP gains more than `NASH_GAIN_TOLERANCE` by switching alone"""

    equilibria = set()

    for actions in PROFILES:
        stable = True

        for player in range(2):
            for other in DiscreteAction:
                deviation = tuple(other if k == player else a for k, a in enumerate(actions))
                if table.utilities[deviation][player] - table.utilities[actions][player] > NASH_GAIN_TOLERANCE:
                    stable = False

        if stable:
            equilibria.add(actions)

    return equilibria


def rgf(params: MarketParams, profile: SponsorshipProfile | DiscreteProfile) -> float:
    """Revenue gain factor of the ISP, `1 + Σ λ0(1-γ_i) / λ`"""

    if params.total_rate <= 0:
        raise PreconditionViolation("revenue gain needs a positive total rate")
    if not isinstance(profile, SponsorshipProfile):
        profile = to_profile(profile)

    return 1 + sum(params.exogenous_rate * (1 - g) for g in profile.gammas) / params.total_rate


def rgf_at_pne(params: MarketParams) -> tuple[float, PneReport]:
    """Largest revenue gain among the discrete equilibria"""
    report = classify_pne(params)

    return max((rgf(params, actions) for actions in report.pne_set), default=math.nan), report

import itertools
import logging
import math
from dataclasses import dataclass

from core.errors import PreconditionViolation
from core.wardrop import ensure_assumptions, solve_wardrop_two_cp
from models.actions import MultiAction
from models.market import DuopolyParams, SponsorshipProfile

logger = logging.getLogger(__name__)

MultiProfile = tuple[MultiAction, MultiAction]

PROFILES: tuple[MultiProfile, ...] = tuple(itertools.product(MultiAction, repeat=2))

ADMISSIBLE_PNE: frozenset[MultiProfile] = frozenset(
    {
        (MultiAction.SN, MultiAction.SN),
        (MultiAction.NN, MultiAction.NN),
        (MultiAction.SN, MultiAction.NN),
    }
)
"""Profiles that can be equilibria when ISP 1 is cheaper"""

NASH_GAIN_TOLERANCE = 1e-12


@dataclass(frozen=True)
class DuopolyFlows:
    usual: tuple[tuple[float, float], tuple[float, float]]
    """Usual rate `λ_ij` from ISP `i` (row) to CP `j` (column)"""
    effective: tuple[tuple[float, float], tuple[float, float]]
    """Usual rate plus exogenous traffic `λ0(1-γ_ij)`"""
    alpha: float
    rgf: tuple[float, float]
    """Revenue gain factor of each ISP"""


@dataclass(frozen=True)
class GameTable3x3:
    utilities: dict[MultiProfile, tuple[float, float]]
    flows: dict[MultiProfile, DuopolyFlows]


@dataclass(frozen=True)
class PneReportMulti:
    sponsor_threshold: float
    """(SN,SN) is an equilibrium while `ρ/β` stays at or below it"""
    neutral_threshold: float
    """(NN,NN) is an equilibrium once `ρ/β` reaches it"""
    ratio: float
    pne_set: frozenset[MultiProfile]


def profile_label(actions: MultiProfile) -> str:
    return "(" + ",".join(action.value for action in actions) + ")"


def _gamma_matrix(actions: MultiProfile) -> tuple[tuple[float, float], tuple[float, float]]:
    """`γ_ij` indexed `[isp][cp]`"""
    g1, g2 = (action.gammas for action in actions)

    return ((g1[0], g2[0]), (g1[1], g2[1]))


def _isp_rgf(usual: tuple[float, float], exogenous: tuple[float, float], isp: int) -> float:
    carried = sum(usual)
    attracted = sum(exogenous)

    if carried > 0:
        return 1 + attracted / carried
    if attracted > 0:
        logger.warning("ISP %d carries only exogenous traffic, revenue gain is unbounded", isp + 1)
        return math.inf

    return 1.0


def route_flows(params: DuopolyParams, actions: MultiProfile) -> DuopolyFlows:
    """
    Equilibrium flows of the two ISP market

    Users of a CP go through the ISP with the lowest effective price `γ_ij c_i`,
    splitting equally on a tie. A CP sponsoring on either ISP is therefore free for
    its users while an unsponsored CP costs `c1`, and the split between CPs is the
    single ISP split at price `c1`.
    """

    ensure_assumptions(params)

    gammas = _gamma_matrix(actions)
    prices = params.access_prices
    sponsors = tuple(action is not MultiAction.NN for action in actions)
    market = params.single_isp()
    flows = solve_wardrop_two_cp(market, SponsorshipProfile(gammas=tuple(0.0 if s else 1.0 for s in sponsors)))

    usual = [[0.0, 0.0], [0.0, 0.0]]
    exogenous = [[params.exogenous_rate * (1 - gammas[i][j]) for j in range(2)] for i in range(2)]

    for j in range(2):
        offers = [gammas[i][j] * prices[i] for i in range(2)]
        cheapest = min(offers)
        carriers = [i for i in range(2) if offers[i] == cheapest]

        for i in carriers:
            usual[i][j] = flows.rates[j] / len(carriers)

    effective = tuple(tuple(usual[i][j] + exogenous[i][j] for j in range(2)) for i in range(2))

    return DuopolyFlows(
        usual=tuple(tuple(row) for row in usual),
        effective=effective,
        alpha=flows.alpha,
        rgf=tuple(_isp_rgf(tuple(usual[i]), tuple(exogenous[i]), i) for i in range(2)),
    )


def cp_utilities_multi(params: DuopolyParams, actions: MultiProfile, flows: DuopolyFlows) -> tuple[float, float]:
    """`U_j = Σ_i (β - ρ(1-γ_ij) c_i) λ̃_ij`"""
    gammas = _gamma_matrix(actions)

    return tuple(
        sum(
            (params.ad_rate - params.repayment * (1 - gammas[i][j]) * params.access_prices[i]) * flows.effective[i][j]
            for i in range(2)
        )
        for j in range(2)
    )


def discrete_game_table_multi(params: DuopolyParams) -> GameTable3x3:
    flows = {actions: route_flows(params, actions) for actions in PROFILES}

    return GameTable3x3(
        utilities={actions: cp_utilities_multi(params, actions, flows[actions]) for actions in PROFILES},
        flows=flows,
    )


def _switch_threshold(table: GameTable3x3, player: int, opponent: MultiAction, price: float) -> float:
    """Largest `ρ/β` at which `player` prefers SN to NN against `opponent`"""

    def rate(own: MultiAction) -> float:
        actions = (own, opponent) if player == 0 else (opponent, own)
        return sum(row[player] for row in table.flows[actions].effective)

    sponsored = rate(MultiAction.SN)

    return (sponsored - rate(MultiAction.NN)) / (price * sponsored)


def classify_pne_multi(params: DuopolyParams) -> PneReportMulti:
    """
    Equilibria of the two ISP sponsorship game

    Sponsoring through the dearer ISP gives the same flows as sponsoring through the
    cheaper one at a higher repayment, so NS is dominated and the game reduces to
    SN against NN priced at `c1`.
    """

    c1, c2 = params.access_prices

    if not 0 < c1 < c2:
        raise PreconditionViolation(f"need 0 < c1 < c2, got c1={c1:g}, c2={c2:g}")

    table = discrete_game_table_multi(params)
    SN, NN = MultiAction.SN, MultiAction.NN
    ratio = params.repayment / params.ad_rate

    sponsor = min(_switch_threshold(table, 0, SN, c1), _switch_threshold(table, 1, SN, c1))
    neutral = max(_switch_threshold(table, 0, NN, c1), _switch_threshold(table, 1, NN, c1))

    pne: set[MultiProfile] = set()
    if ratio <= sponsor:
        pne.add((SN, SN))
    if ratio >= neutral:
        pne.add((NN, NN))
    if sponsor <= ratio <= neutral:
        pne.add((SN, NN))

    if sponsor > neutral:
        logger.warning("threshold interval inverted, (SN,SN) bound %.6g > (NN,NN) bound %.6g", sponsor, neutral)

    return PneReportMulti(
        sponsor_threshold=sponsor,
        neutral_threshold=neutral,
        ratio=ratio,
        pne_set=frozenset(pne),
    )


def brute_force_pne_multi(table: GameTable3x3) -> set[MultiProfile]:
    equilibria = set()

    for actions in PROFILES:
        if all(
            table.utilities[tuple(other if k == player else a for k, a in enumerate(actions))][player]
            - table.utilities[actions][player]
            <= NASH_GAIN_TOLERANCE
            for player in range(2)
            for other in MultiAction
        ):
            equilibria.add(actions)

    return equilibria


def rgf_at_pne_multi(params: DuopolyParams) -> tuple[tuple[float, float], PneReportMulti]:
    """Per ISP revenue gain at the equilibrium most favourable to ISP 1"""
    report = classify_pne_multi(params)
    gains = [route_flows(params, actions).rgf for actions in report.pne_set]

    return max(gains, default=(math.nan, math.nan)), report


def isp_revenue_multi(params: DuopolyParams, actions: MultiProfile) -> tuple[float, float]:
    """`R_i = c_i Σ_j λ̃_ij`"""
    flows = route_flows(params, actions)

    return tuple(price * sum(row) for price, row in zip(params.access_prices, flows.effective))

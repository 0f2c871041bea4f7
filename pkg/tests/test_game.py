import math

import numpy as np
import pytest

from conftest import draw_market
from core.errors import PreconditionViolation
from core.game import (
    GameTable2x2,
    PROFILES,
    best_response,
    best_response_curve,
    brute_force_pne,
    classify_pne,
    cp_utility,
    discrete_game_table,
    find_continuous_pne,
    rgf,
    rgf_at_pne,
    utility_dominance,
    utility_surface,
)
from core.wardrop import solve_wardrop_n_cp
from models.actions import DiscreteAction
from models.market import MarketParams, SponsorshipProfile

S, N = DiscreteAction.S, DiscreteAction.N


def profile(*gammas: float) -> SponsorshipProfile:
    return SponsorshipProfile(gammas=gammas)


def test_utilities_of_pure_profiles(market):
    assert cp_utility(market, profile(0, 0), 0) == pytest.approx(275)
    assert cp_utility(market, profile(0, 0), 1) == pytest.approx(385)
    assert cp_utility(market, profile(1, 1), 0) == pytest.approx(500)
    assert cp_utility(market, profile(1, 1), 1) == pytest.approx(700)


def test_utility_can_be_negative(market):
    assert cp_utility(market.model_copy(update={"ad_rate": 0.2}), profile(0, 1), 0) < 0


def test_dominance_threshold_with_equal_subsidies(market):
    dominant, threshold = utility_dominance(market, profile(0.3, 0.3))

    assert threshold == pytest.approx(600)
    assert not dominant


def test_dominance_for_some_subsidy_factors(market):
    verdicts = [utility_dominance(market, profile(g, 0.5))[0] for g in np.linspace(0, 1, 101)]

    assert any(verdicts)


def test_no_dominance_with_small_first_cp(market):
    small = market.model_copy(update={"capacities": (620, 900)})
    verdicts = [utility_dominance(small, profile(g, 0.5))[0] for g in np.linspace(0, 1, 101)]

    assert not any(verdicts)


def test_dominance_matches_rate_threshold(rng):
    checked = 0

    for _ in range(1000):
        params = MarketParams(access_price=rng.uniform(0, 3), **draw_market(rng))
        if params.repayment * params.access_price > params.ad_rate:
            continue

        gammas = profile(*rng.uniform(0, 1, 2))
        dominant, threshold = utility_dominance(params, gammas)
        u1, u2 = cp_utility(params, gammas, 0), cp_utility(params, gammas, 1)
        if abs(u1 - u2) < 1e-9 * max(abs(u1), abs(u2)):
            continue

        rate = solve_wardrop_n_cp(params, gammas).effective_rates[0]
        assert dominant == (u1 >= u2)
        assert dominant == (rate >= threshold)
        checked += 1

    assert checked > 100


def test_dominance_needs_affordable_sponsorship(market):
    with pytest.raises(PreconditionViolation):
        utility_dominance(market.model_copy(update={"ad_rate": 0.2}), profile(0, 1))


def test_free_access_makes_every_subsidy_a_best_response(market):
    free = market.model_copy(update={"access_price": 0.0})

    assert len(best_response(free, 0.3, 0, 11)) == 11
    assert len(find_continuous_pne(free, 21)) == 21 * 21


def test_costly_sponsorship_keeps_full_price(market):
    poor = market.model_copy(update={"ad_rate": 0.001})

    assert 1.0 in best_response(poor, 1.0, 0, 101)
    assert 1.0 in best_response(poor, 1.0, 1, 101)


def test_best_response_matches_scalar_utility(market):
    grid = np.linspace(0, 1, 51)
    utilities = [cp_utility(market, profile(g, 0.6), 0) for g in grid]
    response = best_response(market, 0.6, 0, 51)

    assert grid[int(np.argmax(utilities))] in response


def test_surface_matches_scalar_utility(market):
    grid = np.linspace(0, 1, 5)
    first, second = utility_surface(market, grid)

    for i, g1 in enumerate(grid):
        for j, g2 in enumerate(grid):
            assert first[i, j] == pytest.approx(cp_utility(market, profile(g1, g2), 0), rel=1e-10)
            assert second[i, j] == pytest.approx(cp_utility(market, profile(g1, g2), 1), rel=1e-10)


def test_best_response_curve_jumps(market):
    curve = best_response_curve(market, 0, 1001)

    assert len(curve.responses) == 1001
    assert len(curve.discontinuities) >= 1


@pytest.mark.parametrize("total_rate", [1200, 1300, 1400, 1500])
def test_no_continuous_equilibrium(market, total_rate):
    params = market.model_copy(update={"total_rate": total_rate})

    assert find_continuous_pne(params, 1001) == []
    assert best_response_curve(params, 0, 1001).discontinuities


def test_grid_needs_two_points(market):
    with pytest.raises(PreconditionViolation):
        best_response(market, 0.5, 0, 1)


def test_discrete_table(market):
    table = discrete_game_table(market)
    alpha = 0.25 + 1 / 400 + math.sqrt(0.25**2 + 1 / 400**2)
    rate_sponsor, rate_other = 700 - 1 / alpha, 900 - 1 / (alpha - 0.5)

    assert table.alphas["00"] == pytest.approx(0.005, rel=1e-12)
    assert table.alphas["11"] == pytest.approx(0.505, rel=1e-12)
    assert table.alphas["01"] == pytest.approx(0.5025125, rel=1e-6)
    assert table.alphas["10"] == pytest.approx(table.alphas["01"], rel=1e-12)

    np.testing.assert_allclose(table.utilities[(S, S)], (275, 385), rtol=1e-6)
    np.testing.assert_allclose(table.utilities[(N, N)], (500, 700), rtol=1e-6)
    np.testing.assert_allclose(table.utilities[(S, N)], (0.55 * rate_sponsor, rate_other), rtol=1e-6)
    np.testing.assert_allclose(table.utilities[(S, N)], (383.9, 501.99), rtol=1e-4)
    np.testing.assert_allclose(table.utilities[(N, S)], (700 - 1 / (alpha - 0.5), 0.55 * (900 - 1 / alpha)), rtol=1e-6)
    np.testing.assert_allclose(table.utilities[(N, S)], (301.99, 493.9), rtol=1e-4)


def test_discrete_alphas_match_numeric_solver(market):
    table = discrete_game_table(market)

    for actions in PROFILES:
        gammas = profile(*(action.gamma for action in actions))
        key = "".join("0" if action is S else "1" for action in actions)
        assert table.alphas[key] == pytest.approx(solve_wardrop_n_cp(market, gammas).alpha, rel=1e-10)


def test_alpha_relations_without_exogenous_traffic(rng):
    for _ in range(1000):
        params = MarketParams(access_price=rng.uniform(0, 3), **draw_market(rng))
        alphas = discrete_game_table(params).alphas
        c, slack = params.access_price, params.excess_capacity

        assert alphas["00"] == pytest.approx(alphas["11"] - c, abs=1e-12)
        assert alphas["00"] == pytest.approx(2 / slack, rel=1e-12)
        assert alphas["01"] >= alphas["00"] - 1e-12
        assert alphas["00"] >= alphas["10"] - c - 1e-12
        assert c + 1 / slack - 1e-12 <= alphas["01"] <= c + 2 / slack + 1e-12


def test_alpha_relations_when_congesting(rng):
    for _ in range(1000):
        params = MarketParams(access_price=rng.uniform(0, 3), **draw_market(rng, "congesting", exogenous=True))
        alphas = discrete_game_table(params).alphas
        c, slack, lam0 = params.access_price, params.excess_capacity, params.exogenous_rate

        assert alphas["00"] == pytest.approx(2 / (slack - 2 * lam0), rel=1e-12)
        assert alphas["11"] == pytest.approx(c + 2 / slack, rel=1e-12)
        assert alphas["00"] >= alphas["10"] - c - 1e-12
        assert alphas["00"] >= alphas["11"] - c - 1e-12
        assert c + 1 / (slack - lam0) - 1e-12 <= alphas["01"] <= c + 2 / (slack - lam0) + 1e-12


def test_classify_worked_instance(market):
    report = classify_pne(market)

    assert report.lower == pytest.approx(0.5657, abs=1e-4)
    assert report.upper == pytest.approx(0.5674, abs=1e-4)
    assert report.ratio == pytest.approx(0.9)
    assert not report.inverted
    assert report.pne_set == {(N, N)}
    assert brute_force_pne(discrete_game_table(market)) == {(N, N)}


def test_cheap_repayment_makes_everyone_sponsor(market):
    report = classify_pne(market.model_copy(update={"repayment": 1e-6}))

    assert report.pne_set == {(S, S)}


def test_classify_needs_positive_price(market):
    with pytest.raises(PreconditionViolation):
        classify_pne(market.model_copy(update={"access_price": 0.0}))


@pytest.mark.parametrize("mode", ["noncongesting", "congesting"])
def test_classification_matches_brute_force(rng, mode):
    compared = 0

    for _ in range(1000):
        params = MarketParams(access_price=rng.uniform(0.05, 2), **draw_market(rng, mode, exogenous=True))
        report = classify_pne(params)
        band = 1e-9 * max(1.0, abs(report.lower), abs(report.upper))
        if abs(report.ratio - report.lower) < band or abs(report.ratio - report.upper) < band:
            continue

        assert report.pne_set == brute_force_pne(discrete_game_table(params))
        assert (N, S) not in report.pne_set
        compared += 1

    assert compared > 900


def test_classification_only_depends_on_ratio(market):
    scaled = market.model_copy(update={"repayment": 0.45, "ad_rate": 0.5})

    assert classify_pne(scaled).pne_set == classify_pne(market).pne_set


def test_brute_force_on_uniform_table():
    table = GameTable2x2(utilities={actions: (1.0, 1.0) for actions in PROFILES}, alphas={})

    assert brute_force_pne(table) == set(PROFILES)


def test_brute_force_on_matching_pennies():
    utilities = {(S, S): (1.0, -1.0), (S, N): (-1.0, 1.0), (N, S): (-1.0, 1.0), (N, N): (1.0, -1.0)}

    assert brute_force_pne(GameTable2x2(utilities=utilities, alphas={})) == set()


def test_revenue_gain_of_pure_profiles(market):
    params = market.model_copy(update={"total_rate": 1000, "exogenous_rate": 300})

    assert rgf(params, (S, S)) == pytest.approx(1.6)
    assert rgf(params, (N, N)) == 1
    assert rgf(params.model_copy(update={"total_rate": 900}), (S, N)) == pytest.approx(4 / 3)
    assert rgf(params, profile(0.5, 1)) == pytest.approx(1.15)


def revenue_market(**update) -> MarketParams:
    base = dict(capacities=(700, 900), total_rate=1000, access_price=0.5, repayment=0.9, ad_rate=1.0)
    return MarketParams(**(base | update))


def test_revenue_gain_falls_with_demand():
    gains = [
        rgf_at_pne(revenue_market(access_price=0.7, exogenous_rate=300, total_rate=lam))[0]
        for lam in np.linspace(905, 995, 19)
    ]

    assert np.all(np.diff(gains) <= 1e-12)
    assert gains[0] > gains[-1]


def test_revenue_gain_grows_with_exogenous_demand():
    gains = [rgf_at_pne(revenue_market(exogenous_rate=lam0))[0] for lam0 in np.linspace(0, 290, 30)]

    assert gains[0] == 1
    assert np.all(np.diff(gains) >= -1e-12)


def test_revenue_gain_steps_once_with_price():
    results = [
        rgf_at_pne(revenue_market(access_price=c, exogenous_rate=200)) for c in np.linspace(0.3, 1.5, 61)
    ]
    gains = [gain for gain, _ in results]

    assert gains[0] == pytest.approx(1.4)
    assert gains[-1] == pytest.approx(1.0)
    assert np.count_nonzero(np.abs(np.diff(gains)) > 1e-12) == 1
    assert results[0][1].pne_set == {(S, S)}
    assert results[-1][1].pne_set == {(N, N)}
    assert all(report.inverted for _, report in results)
    assert all((S, N) not in report.pne_set for _, report in results)

import numpy as np
import pytest

from models.market import DuopolyParams, MarketParams


@pytest.fixture
def market() -> MarketParams:
    """Two CP market used throughout the worked examples"""
    return MarketParams(capacities=(700, 900), total_rate=1200, access_price=0.5, repayment=0.9, ad_rate=1.0)


@pytest.fixture
def duopoly() -> DuopolyParams:
    return DuopolyParams(
        capacities=(700, 900),
        total_rate=900,
        access_prices=(0.7, 0.9),
        repayment=0.9,
        ad_rate=1.0,
        exogenous_rate=300,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


def draw_market(rng: np.random.Generator, mode: str = "noncongesting", exogenous: bool = False) -> dict:
    """
    Keyword arguments of a random two CP market meeting every assumption

    Congesting draws keep `λ0 < 2(m_2 - m_1)` so the larger CP never prefers to be
    the only one not sponsoring.
    """

    m1 = rng.uniform(200, 1000)
    m2 = rng.uniform(1.05 * m1, 1.9 * m1)
    total = rng.uniform(m2, min(2 * m1, m1 + m2) - 1)
    slack = m1 + m2 - total
    cap = 0.48 * slack if mode == "noncongesting" else min(0.48 * slack, 1.9 * (m2 - m1))
    lam0 = rng.uniform(0, cap) if exogenous else 0.0

    return dict(
        capacities=(m1, m2),
        total_rate=total,
        repayment=rng.uniform(0.05, 1.0),
        ad_rate=rng.uniform(0.2, 2.0),
        exogenous_rate=lam0,
        exogenous_mode=mode,
    )

from typing import get_args

from core.wardrop import validate_assumptions
from models.dto.scenario import Scenario, SweepAxis

name = "validate"
description = "Check the scenario market against the model assumptions"
axes: frozenset[str] = frozenset(get_args(SweepAxis))
"""Validation reads the base market only, any sweep is allowed"""


def run(scenario: Scenario, svg: bool) -> int:
    market = scenario.market
    params = market.single() if market.access_price is not None or market.access_prices is None else market.duopoly()
    report = validate_assumptions(params)

    if report.passed:
        print("ok: all assumptions hold")
        return 0

    for key, message in report.violations:
        print(f"{key}: {message}")

    return 3

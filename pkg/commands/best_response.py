import logging

import pandas as pd

from core.game import best_response_curve, find_continuous_pne
from models.dto.scenario import Scenario
from utils.plot import line_chart
from utils.tables import write_csv

logger = logging.getLogger(__name__)

name = "best-response"
description = "Best response curves of both CPs and the ε-PNE search on the subsidy grid"
axes: frozenset[str] = frozenset()


def verdict(found: int, grid: int) -> str:
    if found == 0:
        return f"no PNE at resolution {grid}"
    if found == grid * grid:
        return "all profiles ε-PNE"

    return f"{found} ε-PNE profiles at resolution {grid}"


def run(scenario: Scenario, svg: bool) -> int:
    params = scenario.market.single()
    grid = scenario.grid

    first = best_response_curve(params, 0, grid)
    second = best_response_curve(params, 1, grid)
    equilibria = find_continuous_pne(params, grid)

    frame = pd.DataFrame(
        {
            "gamma_opponent": first.opponent_gammas,
            "br1_min": [response.min() for response in first.responses],
            "br1_max": [response.max() for response in first.responses],
            "br2_min": [response.min() for response in second.responses],
            "br2_max": [response.max() for response in second.responses],
        }
    )
    path = write_csv(frame, scenario.csv_path(name))
    logger.info("wrote %d rows to %s", len(frame), path)
    logger.info(
        "best response jumps: CP1 %d, CP2 %d", len(first.discontinuities), len(second.discontinuities)
    )

    message = verdict(len(equilibria), grid)
    logger.info(message)
    print(message)

    if svg:
        line_chart(
            scenario.svg_path(name),
            frame["gamma_opponent"],
            {"γ̄1(γ2)": frame["br1_max"], "γ̄2(γ1)": frame["br2_max"]},
            "opponent γ",
            "best response γ",
        )

    return 0

import logging

import pandas as pd

from core.delay import delay_threshold_price, delay_vs_price_curve
from core.errors import ConfigError
from models.dto.scenario import Scenario
from utils.plot import line_chart
from utils.tables import write_csv

logger = logging.getLogger(__name__)

name = "delay-sweep"
description = "Mean delay against the access price with the neutral baseline"
axes = frozenset({"c"})


def _price_grid(scenario: Scenario) -> list[float] | None:
    if scenario.prices is not None and scenario.sweep is not None:
        raise ConfigError("delay-sweep takes either prices or a c sweep, not both")
    if scenario.prices is not None:
        return scenario.prices
    if scenario.sweep is not None:
        return scenario.axis_values()

    return None


def run(scenario: Scenario, svg: bool) -> int:
    params = scenario.market.single()
    profile = scenario.profile()
    curve = delay_vs_price_curve(params, profile, _price_grid(scenario))

    threshold = curve.threshold_price
    if params.size == 2 and not (params.exogenous_mode == "congesting" and params.exogenous_rate > 0):
        threshold = delay_threshold_price(params, *profile.gammas)

    logger.info("delay threshold price: %s", "none" if threshold is None else f"{threshold:.6g}")

    frame = pd.DataFrame(
        {
            "c": curve.prices,
            "D": curve.delays,
            "D_neutral": [curve.baseline] * len(curve.prices),
            "threshold": [threshold] * len(curve.prices),
        }
    )
    path = write_csv(frame, scenario.csv_path(name))
    logger.info("wrote %d rows to %s", len(frame), path)

    if svg:
        line_chart(
            scenario.svg_path(name),
            frame["c"],
            {"D": frame["D"], "neutral": frame["D_neutral"]},
            "c",
            "mean delay",
            marks=[threshold] if threshold is not None else None,
            log_x=curve.prices[0] > 0,
        )

    return 0

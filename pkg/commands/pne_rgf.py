import logging

import pandas as pd

from core.game import profile_label, rgf_at_pne
from core.sweep import run_sweep
from models.dto.scenario import AXIS_SYMBOLS, Scenario
from utils.plot import line_chart
from utils.tables import format_set, write_csv

logger = logging.getLogger(__name__)

name = "pne-rgf"
description = "Discrete sponsorship equilibria and the ISP revenue gain along the sweep"
axes = frozenset({"lambda", "lambda0", "c", "rho_over_beta"})


def evaluate(scenario: Scenario, value: float | None) -> dict:
    params = scenario.at(value).market.single()
    gain, report = rgf_at_pne(params)

    return {
        scenario.axis_name: value,
        "A": report.lower,
        "B": report.upper,
        "inverted": report.inverted,
        "rho_over_beta": report.ratio,
        "pne": format_set([profile_label(actions) for actions in report.pne_set]),
        "rgf": gain,
    }


def run(scenario: Scenario, svg: bool) -> int:
    frame = pd.DataFrame(
        run_sweep(lambda value: evaluate(scenario, value), scenario.axis_values(), scenario.axis_name)
    )
    path = write_csv(frame, scenario.csv_path(name))
    logger.info("wrote %d rows to %s", len(frame), path)

    if svg and scenario.sweep is not None:
        line_chart(
            scenario.svg_path(name),
            frame[scenario.axis_name],
            {"RGF": frame["rgf"]},
            AXIS_SYMBOLS[scenario.axis_name],
            "revenue gain factor",
        )

    return 0

import logging

import pandas as pd

from core.duopoly import profile_label, rgf_at_pne_multi
from core.sweep import run_sweep
from models.dto.scenario import AXIS_SYMBOLS, Scenario
from utils.plot import line_chart
from utils.tables import format_set, write_csv

logger = logging.getLogger(__name__)

name = "multi-isp"
description = "Two ISP sponsorship equilibria and per ISP revenue gain along the sweep"
axes = frozenset({"lambda", "lambda0", "c1", "c2", "rho_over_beta"})


def evaluate(scenario: Scenario, value: float | None) -> dict:
    params = scenario.at(value).market.duopoly()
    (gain1, gain2), report = rgf_at_pne_multi(params)

    return {
        scenario.axis_name: value,
        "T_SNSN": report.sponsor_threshold,
        "T_NNNN": report.neutral_threshold,
        "rho_over_beta": report.ratio,
        "pne": format_set([profile_label(actions) for actions in report.pne_set]),
        "rgf1": gain1,
        "rgf2": gain2,
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
            {"RGF1": frame["rgf1"], "RGF2": frame["rgf2"]},
            AXIS_SYMBOLS[scenario.axis_name],
            "revenue gain factor",
        )

    return 0

import logging

import pandas as pd

from core.delay import flows_delay
from core.game import margin
from core.sweep import run_sweep
from core.wardrop import solve_wardrop
from models.dto.scenario import AXIS_SYMBOLS, Scenario
from utils.plot import line_chart
from utils.tables import write_csv

logger = logging.getLogger(__name__)

name = "equilibrium"
description = "Wardrop split, equilibrium cost, delay and CP utilities along the sweep"
axes = frozenset({"lambda", "lambda0", "c", "gamma1", "gamma2", "rho_over_beta"})


def evaluate(scenario: Scenario, value: float | None) -> dict:
    point = scenario.at(value)
    params = point.market.single()
    profile = point.profile()
    flows = solve_wardrop(params, profile)

    row = {scenario.axis_name: value}
    row.update({f"lambda_{i}": rate for i, rate in enumerate(flows.rates, start=1)})
    row["alpha"] = flows.alpha
    row["D"] = flows_delay(params, flows)
    row.update(
        {
            f"U{i}": margin(params, gamma) * rate
            for i, (gamma, rate) in enumerate(zip(profile.gammas, flows.effective_rates), start=1)
        }
    )

    return row


def run(scenario: Scenario, svg: bool) -> int:
    frame = pd.DataFrame(
        run_sweep(lambda value: evaluate(scenario, value), scenario.axis_values(), scenario.axis_name)
    )
    path = write_csv(frame, scenario.csv_path(name))
    logger.info("wrote %d rows to %s", len(frame), path)

    if svg and scenario.sweep is not None:
        rates = [column for column in frame.columns if column.startswith("lambda_")]
        line_chart(
            scenario.svg_path(name),
            frame[scenario.axis_name],
            {f"λ{column.removeprefix('lambda_')}*": frame[column] for column in rates},
            AXIS_SYMBOLS[scenario.axis_name],
            "equilibrium rate",
        )

    return 0

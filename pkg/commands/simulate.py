import logging

import pandas as pd

from core.queue_sim import compare_to_theory, simulate
from core.wardrop import solve_wardrop
from models.dto.scenario import Scenario
from utils.tables import write_csv

logger = logging.getLogger(__name__)

name = "simulate"
description = "Simulate the CP queues and compare sojourn times with the M/M/1 predictions"
axes: frozenset[str] = frozenset()

STATISTICAL_FAILURE = 1
"""Exit code when a simulated sojourn mean is off its M/M/1 value"""


def run(scenario: Scenario, svg: bool) -> int:
    params = scenario.market.single()
    flows = solve_wardrop(params, scenario.profile())
    stats = simulate(params, flows, scenario.simulation)
    comparison = compare_to_theory(stats, flows)

    rows = [
        {
            "cp": str(i),
            "service_rate": rate,
            "count": count,
            "fraction": fraction,
            "mean_sojourn": mean,
            "theory": expected,
            "standard_error": error,
            "z": z,
        }
        for i, (rate, count, fraction, mean, expected, error, z) in enumerate(
            zip(
                stats.service_rates,
                stats.counts,
                stats.fractions,
                stats.mean_sojourn,
                comparison.theory,
                stats.standard_errors,
                comparison.z_scores,
            ),
            start=1,
        )
    ]
    rows.append(
        {
            "cp": "overall",
            "service_rate": None,
            "count": sum(stats.counts),
            "fraction": 1.0,
            "mean_sojourn": stats.overall_mean,
            "theory": comparison.overall_theory,
            "standard_error": None,
            "z": comparison.overall_z,
        }
    )

    path = write_csv(pd.DataFrame(rows), scenario.csv_path(name))
    logger.info("wrote %d rows to %s", len(rows), path)

    message = f"{'pass' if comparison.passed else 'fail'} at |z| <= {comparison.threshold:g}"
    if comparison.passed:
        logger.info(message)
    else:
        logger.warning(message)
    print(message)

    return 0 if comparison.passed else STATISTICAL_FAILURE

import argparse
import logging
import sys

from pydantic import ValidationError

import commands.best_response
import commands.delay_sweep
import commands.equilibrium
import commands.multi_isp
import commands.pne_rgf
import commands.simulate
import commands.validate
import env
from core.errors import (
    AssumptionViolation,
    ConfigError,
    NoConvergence,
    PreconditionViolation,
    UnstableQueue,
)
from models.dto.scenario import Scenario, load_scenario

logger = logging.getLogger("zero_rating")

COMMANDS = (
    commands.validate,
    commands.equilibrium,
    commands.delay_sweep,
    commands.best_response,
    commands.pne_rgf,
    commands.multi_isp,
    commands.simulate,
)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON scenario file")
    common.add_argument("--out", help="CSV output path")
    common.add_argument("--svg", action="store_true", help="Also write an SVG chart")
    common.add_argument("--seed", type=int, help="Simulation seed")
    common.add_argument("--mode", choices=("noncongesting", "congesting"), help="Exogenous traffic mode")
    common.add_argument("--grid", type=int, help="Subsidy factor grid size")

    parser = argparse.ArgumentParser(prog="zero-rating", description="Zero-rating market equilibrium engine")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for command in COMMANDS:
        subparser = subparsers.add_parser(command.name, help=command.description, parents=[common])
        subparser.set_defaults(handler=command.run, axes=command.axes)

    return parser


def apply_overrides(scenario: Scenario, args: argparse.Namespace) -> Scenario:
    data = scenario.model_dump()

    if args.mode is not None:
        data["market"]["exogenous_mode"] = args.mode
    if args.grid is not None:
        data["grid"] = args.grid
    if args.seed is not None:
        data["simulation"]["seed"] = args.seed
    if args.out is not None:
        data["output"]["csv"] = args.out

    return Scenario.model_validate(data)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=env.LOG_LEVEL,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        scenario = apply_overrides(load_scenario(args.config), args)
        scenario.check_axis(args.command, args.axes)
        logger.info("running %s on %s", args.command, args.config)
        code = args.handler(scenario, args.svg or scenario.output.svg is not None)
    except (ConfigError, ValidationError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (AssumptionViolation, PreconditionViolation, UnstableQueue) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 3
    except NoConvergence as e:
        print(f"NoConvergence: {e}", file=sys.stderr)
        return 4

    logger.info("%s finished with exit code %d", args.command, code)

    return code


if __name__ == "__main__":
    sys.exit(main())

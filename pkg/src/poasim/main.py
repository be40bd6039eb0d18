#!/usr/bin/env python
"""
Main entry point for poasim.

Command-line harness around the simulator: run sweeps from presets or YAML
files, replay single runs with a full event trace, classify the
safety/liveness grid and validate configuration files.

Exit codes: 0 on success, 2 on a configuration error, 3 on a runtime error.

Functions:
    build_parser: The argparse parser with the four verbs.
    main: Parse arguments, dispatch and map errors to exit codes.
"""

from __future__ import annotations

import argparse
import logging
import os
from collections.abc import Sequence

import yaml
from dotenv import load_dotenv

from poasim.analysis.region import Sync
from poasim.errors import ConfigError, PoaSimError
from poasim.experiments.replay import replay
from poasim.experiments.reporting import write_region_outputs, write_sweep_outputs
from poasim.experiments.sweep import run_sweep
from poasim.sim_config import DEFAULT_LOG_DIR, DEFAULT_SWEEP
from poasim.tools.logger import get_logger, setup_logging
from poasim.utils.config_loader import (
    RegionConfig,
    ScenarioConfig,
    SweepConfig,
    list_presets,
    load_config,
    scenario_as_sweep,
)
from poasim.utils.flow_utils import get_output_dir

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3


def _with_overrides(
    config: SweepConfig, runs: int | None, seed: int | None
) -> SweepConfig:
    updates: dict[str, int] = {}
    if runs is not None:
        updates["runs"] = runs
    if seed is not None:
        updates["seed"] = seed
    if not updates:
        return config
    return SweepConfig.model_validate({**config.model_dump(), **updates})


def cmd_sweep(args: argparse.Namespace) -> int:
    """Run a sweep (or a region grid, or a scenario ``runs`` times)."""
    config = load_config(args.config)
    out_dir = get_output_dir(args.out)
    if isinstance(config, RegionConfig):
        write_region_outputs(
            config.n, config.sync, out_dir, name=config.name, svg=config.svg
        )
        return EXIT_OK
    if isinstance(config, ScenarioConfig):
        config = scenario_as_sweep(config)
    config = _with_overrides(config, args.runs, args.seed)
    result = run_sweep(config, workers=args.workers)
    files = write_sweep_outputs(result, out_dir, svg=not args.no_svg)
    for record in result.aggregates:
        logger.info(
            f"{record['point_id']}: success_rate={record['success_rate']} "
            f"(+/- {record['ci_half_width']}, {record['runs']} runs)"
        )
    logger.info(f"Aggregate written to {files.aggregate_csv}")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    """Replay one scenario with a fixed seed."""
    config = load_config(args.scenario)
    if not isinstance(config, ScenarioConfig):
        raise ConfigError(
            f"replay needs a scenario, {args.scenario} is a {config.kind} config"
        )
    result = replay(
        config,
        get_output_dir(args.out),
        seed=args.seed,
        trace=True if args.trace else None,
    )
    outcome = result.outcome
    victim_weight, attacker_weight = outcome.weight_gain_per_branch
    logger.info(
        f"double_spend={outcome.double_spend} "
        f"tx1_committed={outcome.tx1_committed_in_partition} "
        f"attacker_branch_adopted={outcome.attacker_branch_adopted} "
        f"tx1_final={outcome.tx1_in_final_chain} "
        f"blocks={outcome.victim_blocks}/{outcome.attacker_blocks} "
        f"weights={victim_weight}/{attacker_weight}"
    )
    logger.info(f"Replay files in {result.directory}")
    return EXIT_OK


def cmd_region(args: argparse.Namespace) -> int:
    """Classify the safety/liveness grid for one n."""
    sync = Sync.SYNCHRONOUS if args.sync else Sync.PARTIAL
    config = RegionConfig(n=args.n, sync=sync, svg=not args.no_svg)
    out_dir = get_output_dir(args.out)
    write_region_outputs(config.n, config.sync, out_dir, svg=config.svg)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    """Load and validate a configuration without running it."""
    config = load_config(args.config)
    logger.info(f"{args.config}: valid {config.kind} config '{config.name}'")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """Build the command-line parser."""
    parser = argparse.ArgumentParser(
        prog="poasim",
        description="Cloning-attack simulator for Aura and Clique.",
        epilog=f"Presets: {', '.join(list_presets())}",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument(
        "--out", default=None, help="output directory (default: $POASIM_OUTPUT_DIR)"
    )
    verbs = parser.add_subparsers(dest="verb", required=True)

    sweep = verbs.add_parser(
        "sweep", parents=[common], help="run a sweep preset or config file"
    )
    sweep.add_argument("config", help="preset name or YAML path")
    sweep.add_argument("--runs", type=int, default=None, help="runs per point")
    sweep.add_argument("--seed", type=int, default=None, help="sweep seed")
    sweep.add_argument(
        "--workers",
        type=int,
        default=DEFAULT_SWEEP["workers"],
        help="worker processes",
    )
    sweep.add_argument("--no-svg", action="store_true", help="skip the chart")
    sweep.set_defaults(handler=cmd_sweep)

    replay_cmd = verbs.add_parser(
        "replay", parents=[common], help="replay one scenario"
    )
    replay_cmd.add_argument("scenario", help="preset name or YAML path")
    replay_cmd.add_argument("--seed", type=int, default=None, help="run seed")
    replay_cmd.add_argument("--trace", action="store_true", help="write the trace")
    replay_cmd.set_defaults(handler=cmd_replay)

    region = verbs.add_parser(
        "region", parents=[common], help="safety/liveness grid for n sealers"
    )
    region.add_argument("--n", type=int, default=9, help="number of sealers")
    timing = region.add_mutually_exclusive_group()
    timing.add_argument("--sync", action="store_true", help="synchronous network")
    timing.add_argument(
        "--partial", action="store_true", help="partially synchronous (default)"
    )
    region.add_argument("--no-svg", action="store_true", help="skip the chart")
    region.set_defaults(handler=cmd_region)

    validate = verbs.add_parser(
        "validate", parents=[common], help="validate a config file"
    )
    validate.add_argument("config", help="preset name or YAML path")
    validate.set_defaults(handler=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run the command line.

    Args:
        argv: Arguments without the program name; ``sys.argv`` when omitted.

    Returns:
        int: The process exit code.

    """
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(
        log_level=logging.DEBUG if args.verbose else logging.INFO,
        log_to_file=os.getenv("POASIM_LOG_TO_FILE", "").lower() in ("1", "true"),
        log_dir=os.getenv("POASIM_LOG_DIR", DEFAULT_LOG_DIR),
    )
    try:
        return args.handler(args)
    except (ConfigError, FileNotFoundError, ValueError, yaml.YAMLError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except PoaSimError as e:
        logger.critical(f"Run failed: {e}", exc_info=True)
        return EXIT_RUNTIME_ERROR
    except OSError as e:
        logger.critical(f"Could not write results: {e}", exc_info=True)
        return EXIT_RUNTIME_ERROR
    except Exception as e:
        logger.critical(f"poasim {args.verb} failed: {e}", exc_info=True)
        return EXIT_RUNTIME_ERROR


def run() -> None:
    """Console-script entry point."""
    raise SystemExit(main())


if __name__ == "__main__":
    run()

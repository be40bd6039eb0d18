"""
Single-run replays for debugging.

A replay runs one scenario with one seed and writes the event trace, the
canonical dump of every final view and the scored outcome. Nothing in the
written files depends on wall-clock time, so repeating a replay gives
byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from poasim.attacks.verdict import RunOutcome
from poasim.net.simulation import score_trace, setup_from_scenario, simulate
from poasim.net.trace import SimulationTrace
from poasim.tools.logger import get_logger
from poasim.utils.config_loader import ScenarioConfig

logger = get_logger(__name__)


@dataclass(frozen=True)
class ReplayResult:
    """Outcome and files of one replay."""

    outcome: RunOutcome
    trace: SimulationTrace
    directory: Path
    trace_file: Path | None
    chains_file: Path
    outcome_file: Path


def replay(
    scenario: ScenarioConfig,
    out_dir: Path,
    seed: int | None = None,
    trace: bool | None = None,
) -> ReplayResult:
    """
    Run ``scenario`` once and write its artifacts.

    Args:
        scenario: A validated scenario.
        out_dir: Output root; files go to ``out_dir/<name>/seed-<seed>/``.
        seed: Run seed; ``scenario.seed`` when omitted.
        trace: Force the event trace on or off; the scenario decides when
               omitted.

    Returns:
        ReplayResult: The outcome and the written paths.

    """
    run_seed = scenario.seed if seed is None else seed
    if trace is not None:
        scenario = scenario.model_copy(update={"trace": trace})
    placement = (
        run_seed if scenario.placement_seed is None else scenario.placement_seed
    )
    setup = setup_from_scenario(scenario, placement)
    result = simulate(setup, run_seed)
    outcome = score_trace(setup, result)

    directory = out_dir / scenario.name / f"seed-{run_seed}"
    directory.mkdir(parents=True, exist_ok=True)
    trace_file = result.log.write(directory / "trace.log") if result.log else None
    chains_file = directory / "chains.txt"
    chains_file.write_text(result.dump(), encoding="utf-8")
    outcome_file = directory / "outcome.json"
    outcome_file.write_text(outcome.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(
        f"Replay {scenario.name} seed {run_seed}: double_spend={outcome.double_spend} "
        f"blocks={outcome.blocks_per_branch} weights={outcome.weight_gain_per_branch}"
    )
    return ReplayResult(
        outcome=outcome,
        trace=result,
        directory=directory,
        trace_file=trace_file,
        chains_file=chains_file,
        outcome_file=outcome_file,
    )

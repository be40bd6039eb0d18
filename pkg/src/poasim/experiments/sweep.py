"""
Parameter sweeps over attack scenarios.

A sweep is a grid of points (one per curve and x value); every point runs
``runs`` times with a sub-seed derived from the sweep seed, the point id
and the run index, so any point can be reproduced on its own. Per-run rows
are sorted by ``(point_id, run)`` whatever order the workers finish in.

Classes:
    SweepPoint: One grid point and its scenario.
    SweepResult: Per-run rows and aggregates of a finished sweep.

Functions:
    derive_seed: Stable 64-bit sub-seed of a run.
    sweep_points: Expand a ``SweepConfig`` into its grid points.
    run_point: Run every repetition of one point.
    run_sweep: Run the whole grid, optionally on a process pool.
    aggregate_rows: Per-point statistics recomputed from per-run rows.
    spearman: Rank correlation used for trend checks.
"""

from __future__ import annotations

import hashlib
import math
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from poasim.net.simulation import run_simulation
from poasim.sim_config import DEFAULT_SWEEP
from poasim.tools.logger import get_logger
from poasim.utils.config_loader import ScenarioConfig, SweepConfig

logger = get_logger(__name__)

AGGREGATE_CSV_COLUMNS = (
    "point_id",
    "protocol",
    "label",
    "x",
    "runs",
    "success_rate",
    "ci_half_width",
    "mean_victim_blocks",
    "mean_attacker_blocks",
    "mean_victim_weight_gain",
    "mean_attacker_weight_gain",
)

# Per-run columns averaged into the aggregate, by aggregate column.
_MEANS = {
    "mean_victim_blocks": "victim_blocks",
    "mean_attacker_blocks": "attacker_blocks",
    "mean_victim_weight_gain": "victim_weight_gain",
    "mean_attacker_weight_gain": "attacker_weight_gain",
}


def derive_seed(seed: int, point_id: str, run: int) -> int:
    """Sub-seed of one run: the first 8 bytes of a BLAKE2b digest."""
    digest = hashlib.blake2b(f"{seed}:{point_id}:{run}".encode(), digest_size=8)
    return int.from_bytes(digest.digest(), "big")


def point_id(label: str, x: int) -> str:
    """Identifier of a grid point, e.g. ``k3@26000``."""
    return f"{label}@{x}"


@dataclass(frozen=True)
class SweepPoint:
    """One grid point: a curve label, an x value and the resulting scenario."""

    point_id: str
    label: str
    x: int
    scenario: ScenarioConfig


def sweep_points(config: SweepConfig) -> list[SweepPoint]:
    """Grid points in curve order, then x order."""
    return [
        SweepPoint(
            point_id=point_id(curve.label, x),
            label=curve.label,
            x=x,
            scenario=config.point_scenario(curve, x),
        )
        for curve in config.curves
        for x in config.x.points()
    ]


def run_point(point: SweepPoint, runs: int, seed: int) -> list[dict[str, object]]:
    """Per-run rows of one grid point."""
    rows = []
    for run in range(runs):
        sub_seed = derive_seed(seed, point.point_id, run)
        outcome = run_simulation(point.scenario, sub_seed)
        rows.append(outcome.to_row(point.point_id, run, sub_seed))
    logger.debug(
        f"Point {point.point_id}: {sum(int(r['success']) for r in rows)}/{runs} "
        "double spends"
    )
    return rows


def _run_point_job(job: tuple[SweepPoint, int, int]) -> list[dict[str, object]]:
    point, runs, seed = job
    return run_point(point, runs, seed)


def _mean(values: Sequence[float]) -> float:
    return float(np.mean(values)) if values else 0.0


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def aggregate_rows(
    rows: Iterable[Mapping[str, object]], points: Sequence[SweepPoint]
) -> list[dict[str, object]]:
    """
    Per-point statistics, in grid order.

    ``rows`` may come straight from ``run_point`` or from a per-run CSV read
    back as strings; both give the same aggregate.
    """
    grouped: dict[str, list[Mapping[str, object]]] = {}
    for row in rows:
        grouped.setdefault(str(row["point_id"]), []).append(row)
    z = DEFAULT_SWEEP["ci_z"]
    aggregates = []
    for point in points:
        point_rows = grouped.get(point.point_id, [])
        runs = len(point_rows)
        successes = [int(str(row["success"])) for row in point_rows]
        rate = _mean(successes)
        half_width = z * math.sqrt(rate * (1 - rate) / runs) if runs else 0.0
        record: dict[str, object] = {
            "point_id": point.point_id,
            "protocol": point.scenario.protocol.value,
            "label": point.label,
            "x": point.x,
            "runs": runs,
            "success_rate": _fmt(rate),
            "ci_half_width": _fmt(half_width),
        }
        for column, source in _MEANS.items():
            record[column] = _fmt(_mean([int(str(row[source])) for row in point_rows]))
        aggregates.append(record)
    return aggregates


@dataclass
class SweepResult:
    """A finished sweep: sorted per-run rows and their aggregates."""

    config: SweepConfig
    points: list[SweepPoint]
    rows: list[dict[str, object]] = field(default_factory=list)
    aggregates: list[dict[str, object]] = field(default_factory=list)

    def curve(self, label: str, metric: str = "success_rate") -> list[float]:
        """One aggregate column of a curve, in x order."""
        return [
            float(str(record[metric]))
            for record in self.aggregates
            if record["label"] == label
        ]


def run_sweep(
    config: SweepConfig, workers: int = DEFAULT_SWEEP["workers"]
) -> SweepResult:
    """
    Run every point of ``config``.

    Args:
        config: The validated sweep.
        workers: Worker processes; 1 runs everything in this process.

    Returns:
        SweepResult: Rows sorted by ``(point_id, run)`` and grid-ordered
        aggregates.

    """
    points = sweep_points(config)
    jobs = [(point, config.runs, config.seed) for point in points]
    logger.info(
        f"Sweep {config.name}: {len(points)} points x {config.runs} runs "
        f"on {workers} worker(s)"
    )
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(_run_point_job, jobs))
    else:
        batches = [_run_point_job(job) for job in jobs]
    rows = sorted(
        (row for batch in batches for row in batch),
        key=lambda row: (str(row["point_id"]), int(str(row["run"]))),
    )
    return SweepResult(
        config=config,
        points=points,
        rows=rows,
        aggregates=aggregate_rows(rows, points),
    )


def _average_ranks(values: Sequence[float]) -> np.ndarray:
    data = np.asarray(values, dtype=np.float64)
    order = np.argsort(data, kind="mergesort")
    ranks = np.empty(len(data), dtype=np.float64)
    ordered = data[order]
    start = 0
    while start < len(data):
        end = start
        while end + 1 < len(data) and ordered[end + 1] == ordered[start]:
            end += 1
        # Ties share the mean of their 1-based positions.
        ranks[order[start : end + 1]] = (start + end) / 2 + 1
        start = end + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """
    Spearman rank correlation of two equally long sequences.

    Returns NaN when either sequence is constant.

    Raises:
        ValueError: If the lengths differ or fewer than two values are given.

    """
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError(
            f"spearman needs two sequences of equal length >= 2, got {len(xs)} "
            f"and {len(ys)}"
        )
    rx, ry = _average_ranks(xs), _average_ranks(ys)
    if np.std(rx) == 0 or np.std(ry) == 0:
        return float("nan")
    return float(np.corrcoef(rx, ry)[0, 1])

"""
CSV and SVG outputs of sweeps.

Every sweep writes ``runs.csv`` (one row per run) and ``aggregate.csv``
(one row per grid point) under ``<output>/<sweep name>/``. The chart is
drawn from the aggregate CSV as read back from disk, so regenerating it
from the files gives the same SVG. Safety/liveness grids go to
``region.csv`` and ``region.svg``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from matplotlib.figure import Figure

from poasim.analysis.region import (
    REGION_CSV_COLUMNS,
    Sync,
    region_rows,
    render_region_svg,
    safe_live_region,
    safe_live_v_set,
)
from poasim.attacks.verdict import RUN_CSV_COLUMNS
from poasim.experiments.sweep import AGGREGATE_CSV_COLUMNS, SweepResult
from poasim.tools.logger import get_logger
from poasim.utils.config_loader import PlotConfig
from poasim.utils.flow_utils import read_csv, save_svg, write_csv

logger = get_logger(__name__)

RUNS_CSV = "runs.csv"
AGGREGATE_CSV = "aggregate.csv"


@dataclass(frozen=True)
class SweepFiles:
    """Paths written for one sweep."""

    runs_csv: Path
    aggregate_csv: Path
    svg: Path | None = None


def render_sweep_svg(
    aggregates: list[dict[str, str]], plot: PlotConfig, path: Path
) -> Path:
    """
    Draw one line per curve label from aggregate rows.

    Args:
        aggregates: Rows of ``aggregate.csv`` (string values).
        plot: Title, axis labels, plotted column and x scaling.
        path: Target SVG file.

    Returns:
        Path: The written SVG.

    Raises:
        KeyError: If ``plot.metric`` is not an aggregate column.

    """
    if plot.metric not in AGGREGATE_CSV_COLUMNS:
        raise KeyError(f"Unknown plot metric {plot.metric!r}")
    curves: dict[str, list[tuple[float, float]]] = {}
    for row in aggregates:
        point = (float(row["x"]) / plot.x_scale, float(row[plot.metric]))
        curves.setdefault(row["label"], []).append(point)

    fig = Figure(figsize=(6, 4))
    ax = fig.subplots()
    for label, points in curves.items():
        xs, ys = zip(*sorted(points))
        ax.plot(xs, ys, marker="o", label=label)
    ax.set_title(plot.title)
    ax.set_xlabel(plot.xlabel)
    ax.set_ylabel(plot.ylabel)
    ax.grid(True, alpha=0.3)
    if len(curves) > 1:
        ax.legend(fontsize=8)
    return save_svg(fig, path)


def regenerate_svg(aggregate_csv: Path, plot: PlotConfig, path: Path) -> Path:
    """Redraw a sweep chart from its aggregate CSV."""
    return render_sweep_svg(read_csv(aggregate_csv), plot, path)


def write_sweep_outputs(
    result: SweepResult, out_dir: Path, svg: bool = True
) -> SweepFiles:
    """
    Write the CSVs (and the chart) of a finished sweep.

    Args:
        result: The finished sweep.
        out_dir: Output root; files go to ``out_dir / result.config.name``.
        svg: Whether to render the chart.

    """
    target = out_dir / result.config.name
    runs_csv = write_csv(target / RUNS_CSV, RUN_CSV_COLUMNS, result.rows)
    aggregate_csv = write_csv(
        target / AGGREGATE_CSV, AGGREGATE_CSV_COLUMNS, result.aggregates
    )
    chart = None
    if svg:
        chart = regenerate_svg(
            aggregate_csv, result.config.plot, target / f"{result.config.name}.svg"
        )
    logger.info(f"Sweep {result.config.name} written to {target}")
    return SweepFiles(runs_csv=runs_csv, aggregate_csv=aggregate_csv, svg=chart)


@dataclass(frozen=True)
class RegionFiles:
    """Paths written for one safety/liveness grid."""

    csv: Path
    svg: Path | None = None


def write_region_outputs(
    n: int, sync: Sync, out_dir: Path, name: str | None = None, svg: bool = True
) -> RegionFiles:
    """Classify the ``(t, V)`` grid for ``n`` and write it as CSV (and SVG)."""
    points = safe_live_region(n, sync)
    target = out_dir / (name or f"region-n{n}-{sync.value}")
    csv_path = write_csv(target / "region.csv", REGION_CSV_COLUMNS, region_rows(points))
    chart = render_region_svg(points, target / "region.svg") if svg else None
    for t in range(n + 1):
        chosen = sorted(safe_live_v_set(n, t, sync))
        logger.info(f"n={n} t={t}: safe and live V = {chosen or 'none'}")
    return RegionFiles(csv=csv_path, svg=chart)

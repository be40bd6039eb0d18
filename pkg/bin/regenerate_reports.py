#!/usr/bin/env python
"""
Script to regenerate sweep charts from the aggregate CSVs on disk.
Charts are redrawn without rerunning any simulation, so tweaking a preset's
plot section only needs this script.

Usage:
    python bin/regenerate_reports.py [output-dir]
"""

import sys
from pathlib import Path

# Add the src directory to the Python path
sys.path.append(str(Path(__file__).parent.parent / "src"))

from poasim.errors import ConfigError
from poasim.experiments.reporting import AGGREGATE_CSV, regenerate_svg
from poasim.utils.config_loader import PlotConfig, SweepConfig, load_config
from poasim.utils.flow_utils import get_output_dir


def plot_for(name):
    """The plot section of the preset called ``name``, or the defaults."""
    try:
        config = load_config(name)
    except (ConfigError, FileNotFoundError, ValueError):
        return PlotConfig(title=name)
    if isinstance(config, SweepConfig):
        return config.plot
    return PlotConfig(title=name)


def regenerate_sweep_reports(output_dir):
    """Redraw ``<name>.svg`` next to every ``aggregate.csv`` under ``output_dir``."""
    aggregate_files = sorted(output_dir.glob(f"*/{AGGREGATE_CSV}"))
    print(f"Found {len(aggregate_files)} sweep results to regenerate")

    for aggregate_csv in aggregate_files:
        name = aggregate_csv.parent.name
        try:
            svg = regenerate_svg(
                aggregate_csv, plot_for(name), aggregate_csv.parent / f"{name}.svg"
            )
            print(f"Regenerated {svg}")
        except (KeyError, OSError, ValueError) as e:
            print(f"Error regenerating {aggregate_csv}: {e}")


if __name__ == "__main__":
    regenerate_sweep_reports(get_output_dir(sys.argv[1] if len(sys.argv) > 1 else None))

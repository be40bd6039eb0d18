#!/usr/bin/env python3
"""
Debug script to examine configuration loading in poasim.
This script helps diagnose preset lookup and validation problems.

Usage:
    python bin/debug_config.py [preset-or-path ...]
"""

import sys
from pathlib import Path

# Add the src directory to the Python path so we can import modules
sys.path.append(str(Path(__file__).parent.parent / "src"))

from poasim.errors import ConfigError
from poasim.experiments.sweep import sweep_points
from poasim.utils.config_loader import (
    SweepConfig,
    _get_config_path,
    list_presets,
    load_yaml_config,
    parse_config,
)


def print_separator():
    print("\n" + "=" * 70 + "\n")


def debug_path_resolution(name):
    print(f"Debugging Path Resolution for {name!r}:")
    resolved_path = _get_config_path(name)
    print(f"Resolved path: {resolved_path}")
    print(f"Does resolved path exist? {resolved_path.exists()}")
    print_separator()


def debug_config(name):
    print(f"Debugging Config Loader for {name!r}:")
    try:
        data = load_yaml_config(name)
        print(f"Top-level keys: {sorted(data)}")
    except (FileNotFoundError, ValueError) as e:
        print(f"Error in load_yaml_config: {e}")
        print_separator()
        return

    try:
        config = parse_config(data, name)
        print(f"Valid {config.kind} config '{config.name}'")
        if isinstance(config, SweepConfig):
            points = sweep_points(config)
            print(f"{len(points)} points x {config.runs} runs")
            for point in points:
                print(f"  {point.point_id}")
    except ConfigError as e:
        print(f"Validation failed: {e}")

    print_separator()


if __name__ == "__main__":
    print("\npoasim Configuration Debugging Script")
    print_separator()

    names = sys.argv[1:] or list_presets()
    for name in names:
        debug_path_resolution(name)
        debug_config(name)

    print("Debugging complete.")

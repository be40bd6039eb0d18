"""
Output utilities for poasim.

This module provides the output directory lookup and the CSV and SVG
writers shared by sweeps, replays and the region grid. Writers produce
byte-identical files for identical inputs.
"""

from __future__ import annotations

import csv
import os
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

import matplotlib
from matplotlib.figure import Figure

from poasim.sim_config import DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV
from poasim.tools.logger import get_logger

logger = get_logger(__name__)

# Fixed so regenerated SVGs do not differ in their element ids.
SVG_HASH_SALT = "poasim"


def get_output_dir(override: str | None = None) -> Path:
    """
    Return the directory results are written to.

    Args:
        override: Explicit directory (the ``--out`` flag); wins over the
                  ``POASIM_OUTPUT_DIR`` environment variable, which wins over
                  ``./output``.

    Returns:
        Path: The output directory (not created).

    """
    if override:
        return Path(override)
    return Path(os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)


def write_csv(
    path: Path, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]
) -> Path:
    """Write ``rows`` under a header row, creating parent directories."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as file:
        writer = csv.DictWriter(file, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({column: row[column] for column in columns})
    logger.debug(f"Wrote {path}")
    return path


def read_csv(path: Path) -> list[dict[str, str]]:
    """
    Read a CSV written by ``write_csv``.

    Raises:
        FileNotFoundError: If ``path`` does not exist.

    """
    try:
        with open(path, encoding="utf-8", newline="") as file:
            return list(csv.DictReader(file))
    except FileNotFoundError as e:
        raise FileNotFoundError(f"CSV file not found at {path}") from e


def save_svg(fig: Figure, path: Path) -> Path:
    """Save a matplotlib figure as a reproducible SVG."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path

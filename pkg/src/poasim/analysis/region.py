"""
Safety and liveness of decision thresholds.

With n sealers, t of them Byzantine (cloned or silent) and a block decided
once V distinct sealers built on it, a configuration is

- safe under partial synchrony when ``V > (n + t) / 2``, i.e.
  ``V >= floor((n + t) / 2) + 1``, and under synchrony when ``V > t``;
- live when ``V < n - t`` (strict, so ``V = n - t`` counts as not live).

Also holds the closed-form attack bounds used by the attack planners.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from matplotlib.colors import ListedColormap
from matplotlib.figure import Figure
from matplotlib.patches import Rectangle

from poasim.errors import ConfigError
from poasim.tools.logger import get_logger
from poasim.utils.flow_utils import save_svg

logger = get_logger(__name__)

REGION_CSV_COLUMNS = ("n", "t", "V", "safe", "live")


class Sync(str, Enum):
    """Network timing assumption."""

    SYNCHRONOUS = "synchronous"
    PARTIAL = "partial"


@dataclass(frozen=True)
class RegionPoint:
    """Classification of one ``(n, t, V)`` configuration."""

    n: int
    t: int
    v: int
    sync: Sync
    safe: bool
    live: bool

    def __post_init__(self) -> None:
        """Enforce ``0 <= t <= n`` and ``1 <= V <= n``."""
        if not 0 <= self.t <= self.n or not 1 <= self.v <= self.n:
            raise ConfigError(
                f"Region point out of range: n={self.n} t={self.t} V={self.v}"
            )


def _check(n: int, t: int, v: int) -> None:
    if n < 1 or not 0 <= t <= n or not 1 <= v <= n:
        raise ConfigError(f"Need 0 <= t <= n and 1 <= V <= n, got n={n} t={t} V={v}")


def is_safe(n: int, t: int, v: int, sync: Sync) -> bool:
    """No two conflicting blocks can both be decided."""
    _check(n, t, v)
    if sync is Sync.SYNCHRONOUS:
        return v >= t + 1
    return v >= (n + t) // 2 + 1


def is_live(n: int, t: int, v: int) -> bool:
    """Blocks keep being decided with t sealers not contributing."""
    _check(n, t, v)
    return v < n - t


def safe_live_region(n: int, sync: Sync) -> list[RegionPoint]:
    """Classify the whole ``(t, V)`` grid for ``n``, ordered by t then V."""
    if n < 1:
        raise ConfigError(f"n must be at least 1, got {n}")
    return [
        RegionPoint(
            n=n,
            t=t,
            v=v,
            sync=sync,
            safe=is_safe(n, t, v, sync),
            live=is_live(n, t, v),
        )
        for t in range(n + 1)
        for v in range(1, n + 1)
    ]


def safe_live_v_set(n: int, t: int, sync: Sync) -> set[int]:
    """Thresholds V that are both safe and live for ``(n, t)``."""
    return {
        v for v in range(1, n + 1) if is_safe(n, t, v, sync) and is_live(n, t, v)
    }


def min_aura_attack_duration(n: int, step_duration_ms: int) -> int:
    """Shortest partition that lets a single attacker overtake, for odd n."""
    return (n + 1) * step_duration_ms


def max_victim_gain(n: int) -> int:
    """Largest weight the victim side of a Clique partition can gain."""
    return 2 * (n // 2 + 1)


def min_clique_blind_gain(n: int) -> int:
    """Attacker-side weight that beats any victim branch."""
    return max_victim_gain(n) + 1


def region_rows(points: list[RegionPoint]) -> list[dict[str, int]]:
    """Flat CSV rows (booleans as 0/1)."""
    return [
        {"n": p.n, "t": p.t, "V": p.v, "safe": int(p.safe), "live": int(p.live)}
        for p in sorted(points, key=lambda p: (p.t, p.v))
    ]


def render_region_svg(points: list[RegionPoint], path: Path) -> Path:
    """
    Draw the (t, V) grid as a heat map.

    Cells are coloured by class: safe and live, safe only, live only,
    neither.
    """
    if not points:
        raise ConfigError("Nothing to render: the region is empty")
    n = points[0].n
    grid = np.zeros((n, n + 1), dtype=np.int64)
    for p in points:
        grid[p.v - 1, p.t] = int(p.safe) * 2 + int(p.live)
    cmap = ListedColormap(["#d9d9d9", "#9ecae1", "#fdae6b", "#31a354"])

    fig = Figure(figsize=(6, 5))
    ax = fig.subplots()
    ax.imshow(grid, origin="lower", cmap=cmap, vmin=0, vmax=3, aspect="auto")
    ax.set_xticks(range(n + 1))
    ax.set_yticks(range(n))
    ax.set_yticklabels([str(v) for v in range(1, n + 1)])
    ax.set_xlabel("Byzantine sealers t")
    ax.set_ylabel("decision threshold |V|")
    ax.set_title(f"n={n}, {points[0].sync.value} synchrony")
    handles = [Rectangle((0, 0), 1, 1, color=cmap(i)) for i in (3, 2, 1, 0)]
    ax.legend(
        handles,
        ["safe and live", "safe only", "live only", "neither"],
        loc="upper left",
        fontsize=8,
    )
    written = save_svg(fig, path)
    logger.info(f"Wrote region chart to {written}")
    return written

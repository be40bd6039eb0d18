"""
Run artifacts: the event trace and the simulation outputs.

The trace is one line per processed event with the fixed field order
``fire_ms seq kind endpoint detail``. It never goes through logging so a
replay writes byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from poasim.chain.dump import dump_views
from poasim.chain.models import ChainView, Protocol
from poasim.net.events import Event


class TraceLog:
    """Append-only event trace."""

    def __init__(self) -> None:
        """Start an empty trace."""
        self.lines: list[str] = []

    def record(self, event: Event, detail: str) -> None:
        """Add the line for a processed event."""
        endpoint = "-" if event.endpoint is None else str(event.endpoint)
        self.lines.append(
            f"{event.fire_ms} {event.sequence} {event.kind.value} {endpoint} {detail}"
        )

    def text(self) -> str:
        """The whole trace as text."""
        return "".join(f"{line}\n" for line in self.lines)

    def write(self, path: Path) -> Path:
        """Write the trace to ``path``."""
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.text(), encoding="utf-8")
        return path


@dataclass
class SimulationTrace:
    """Everything a finished run leaves behind for scoring and dumping."""

    protocol: Protocol
    n: int
    seed: int
    end_ms: int
    final_views: dict[int, ChainView]
    reference_endpoint: int
    attacker_stall_ms: int | None = None
    heal_views: dict[int, ChainView] = field(default_factory=dict)
    partition_start_ms: int | None = None
    partition_end_ms: int | None = None
    fork_base: str | None = None
    attacker_first_block: str | None = None
    commit_ms: dict[str, int] = field(default_factory=dict)
    log: TraceLog | None = None

    @property
    def reference_view(self) -> ChainView:
        """Final view of the endpoint the verdict is read from."""
        return self.final_views[self.reference_endpoint]

    @property
    def converged(self) -> bool:
        """True when every active endpoint ended on the same head."""
        return len({view.head for view in self.final_views.values()}) <= 1

    def dump(self) -> str:
        """Canonical dump of every final view."""
        return dump_views(self.final_views)

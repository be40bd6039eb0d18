"""
Discrete events and the deterministic event queue.

Events are ordered by ``(fire_ms, rank, sequence)``. The rank fixes the
processing order of different kinds at the same millisecond; the sequence
number is assigned in creation order and breaks every remaining tie.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from poasim.chain.models import ChainView, Transaction
from poasim.errors import SimulationError


class EventKind(str, Enum):
    """What an event does when it fires."""

    PARTITION_EDGE = "PARTITION_EDGE"
    INJECT_TX = "INJECT_TX"
    DELIVER = "DELIVER"
    TIMER = "TIMER"


RANK_PARTITION_EDGE = 0
RANK_INJECT_TX = 1
RANK_DELIVER = 2
RANK_TIMER = 3
# Clique out-of-order seals fire after in-order seals of the same millisecond.
RANK_LATE_TIMER = 4

DEFAULT_RANKS = {
    EventKind.PARTITION_EDGE: RANK_PARTITION_EDGE,
    EventKind.INJECT_TX: RANK_INJECT_TX,
    EventKind.DELIVER: RANK_DELIVER,
    EventKind.TIMER: RANK_TIMER,
}


@dataclass(order=True)
class Event:
    """A scheduled simulation event; only the ordering key is compared."""

    fire_ms: int
    rank: int
    sequence: int
    kind: EventKind = field(compare=False)
    endpoint: int | None = field(default=None, compare=False)
    sender: int | None = field(default=None, compare=False)
    view: ChainView | None = field(default=None, compare=False)
    tx: Transaction | None = field(default=None, compare=False)
    token: int = field(default=0, compare=False)
    payload: Any = field(default=None, compare=False)


class EventQueue:
    """Min-heap of events with creation-order sequence numbers."""

    def __init__(self) -> None:
        """Create an empty queue."""
        self._heap: list[Event] = []
        self._sequence = 0
        self._last_fired = 0

    def __len__(self) -> int:
        """Number of pending events."""
        return len(self._heap)

    def push(
        self,
        fire_ms: int,
        kind: EventKind,
        rank: int | None = None,
        **payload: Any,
    ) -> Event:
        """
        Schedule an event.

        Raises:
            SimulationError: If the event would fire before the last popped one.

        """
        if fire_ms < self._last_fired:
            raise SimulationError(
                f"{kind.value} scheduled at {fire_ms} ms, before the clock "
                f"({self._last_fired} ms)"
            )
        event = Event(
            fire_ms=fire_ms,
            rank=DEFAULT_RANKS[kind] if rank is None else rank,
            sequence=self._sequence,
            kind=kind,
            **payload,
        )
        self._sequence += 1
        heapq.heappush(self._heap, event)
        return event

    def peek_ms(self) -> int | None:
        """Fire time of the next event, if any."""
        return self._heap[0].fire_ms if self._heap else None

    def pop(self) -> Event:
        """Remove and return the next event in total order."""
        event = heapq.heappop(self._heap)
        self._last_fired = event.fire_ms
        return event

"""
Simulated network: endpoints, partitions, delays and clone bindings.

Classes:
    NodeEndpoint: One simulated node; clones share a SealerId.
    CloneBinding: Two endpoints that run under the same sealer identity.
    PartitionWindow / PartitionSchedule: Time-windowed endpoint groups.
    DelayModel: Base delay plus uniform integer jitter.
    Network: Reachability and broadcast over the event queue.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from poasim.chain.models import ChainView, SealerId
from poasim.errors import ConfigError, SimulationError
from poasim.net.events import Event, EventKind, EventQueue
from poasim.sim_config import DEFAULT_NETWORK
from poasim.tools.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class NodeEndpoint:
    """A simulated node; ``sealer`` is None for observers."""

    endpoint_id: int
    sealer: SealerId | None = None


@dataclass
class CloneBinding:
    """
    Two endpoints sharing one sealer identity.

    ``endpoints[0]`` is the original node, ``endpoints[1]`` the clone that
    stays dormant until activation copies the original's view into it.
    """

    sealer: SealerId
    endpoints: tuple[int, int]
    split_at_ms: int | None = None

    @property
    def original(self) -> int:
        """Endpoint that runs from the start."""
        return self.endpoints[0]

    @property
    def clone(self) -> int:
        """Endpoint started at the partition."""
        return self.endpoints[1]


@dataclass(frozen=True)
class PartitionWindow:
    """Endpoint groups isolated from each other during ``[start_ms, end_ms)``."""

    start_ms: int
    end_ms: int
    groups: tuple[frozenset[int], ...]

    def contains(self, clock_ms: int) -> bool:
        """True when the window is in force at ``clock_ms``."""
        return self.start_ms <= clock_ms < self.end_ms

    def group_of(self, endpoint: int) -> int | None:
        """Index of the group holding ``endpoint``."""
        for index, group in enumerate(self.groups):
            if endpoint in group:
                return index
        return None


@dataclass
class PartitionSchedule:
    """Non-overlapping partition windows; outside them everyone is connected."""

    windows: list[PartitionWindow] = field(default_factory=list)

    def validate(self, endpoints: Iterable[int]) -> None:
        """
        Check every window against the endpoint set.

        Raises:
            ConfigError: On empty windows, overlapping windows or groups that
                are not disjoint or do not cover every endpoint.

        """
        universe = frozenset(endpoints)
        problems: list[str] = []
        ordered = sorted(self.windows, key=lambda w: w.start_ms)
        for index, window in enumerate(ordered):
            label = f"window [{window.start_ms}, {window.end_ms})"
            if window.end_ms <= window.start_ms:
                problems.append(f"{label} has zero or negative length")
            seen: set[int] = set()
            for group in window.groups:
                if seen & group:
                    problems.append(f"{label} groups overlap on {sorted(seen & group)}")
                seen |= group
            if seen != universe:
                missing = sorted(universe - seen)
                unknown = sorted(seen - universe)
                problems.append(
                    f"{label} groups must cover every endpoint "
                    f"(missing {missing}, unknown {unknown})"
                )
            if index and ordered[index - 1].end_ms > window.start_ms:
                problems.append(f"{label} overlaps the previous window")
        if problems:
            raise ConfigError("Invalid partition schedule", problems)

    def window_at(self, clock_ms: int) -> PartitionWindow | None:
        """The window in force at ``clock_ms``, if any."""
        for window in self.windows:
            if window.contains(clock_ms):
                return window
        return None

    def starting_at(self, clock_ms: int) -> PartitionWindow | None:
        """The window opening exactly at ``clock_ms``, if any."""
        for window in self.windows:
            if window.start_ms == clock_ms:
                return window
        return None

    def open(
        self, start_ms: int, end_ms: int, groups: Sequence[Iterable[int]]
    ) -> PartitionWindow:
        """Add a window at runtime (attack trigger)."""
        window = PartitionWindow(
            start_ms=start_ms,
            end_ms=end_ms,
            groups=tuple(frozenset(group) for group in groups),
        )
        self.windows.append(window)
        return window

    def close(self, window: PartitionWindow, at_ms: int) -> PartitionWindow:
        """Shorten ``window`` so it ends at ``at_ms`` (early heal)."""
        if not window.start_ms < at_ms <= window.end_ms:
            raise SimulationError(
                f"Cannot close window [{window.start_ms}, {window.end_ms}) at {at_ms}"
            )
        closed = replace(window, end_ms=at_ms)
        self.windows[self.windows.index(window)] = closed
        return closed


@dataclass(frozen=True)
class DelayModel:
    """Per-message delay: ``base_delay_ms`` plus a uniform ``[0, jitter_ms]`` draw."""

    base_delay_ms: int = DEFAULT_NETWORK["base_delay_ms"]
    jitter_ms: int = DEFAULT_NETWORK["jitter_ms"]

    def __post_init__(self) -> None:
        """Delays cannot be negative."""
        if self.base_delay_ms < 0 or self.jitter_ms < 0:
            raise ConfigError(
                f"Delays must be non-negative, got base={self.base_delay_ms} "
                f"jitter={self.jitter_ms}"
            )

    def sample(self, rng: np.random.Generator) -> int:
        """Draw one message delay."""
        if self.jitter_ms == 0:
            return self.base_delay_ms
        return self.base_delay_ms + int(rng.integers(0, self.jitter_ms + 1))

    @property
    def max_delay_ms(self) -> int:
        """Upper bound of any sampled delay."""
        return self.base_delay_ms + self.jitter_ms


class Network:
    """
    Message fabric of one run.

    Cross-group messages are dropped while a partition window is in force,
    both when they are sent and when they would be delivered.
    """

    def __init__(
        self,
        endpoints: Sequence[NodeEndpoint],
        queue: EventQueue,
        rng: np.random.Generator,
        delay: DelayModel | None = None,
        schedule: PartitionSchedule | None = None,
    ) -> None:
        """Connect ``endpoints``; dormant clones are activated later."""
        self.endpoints = {endpoint.endpoint_id: endpoint for endpoint in endpoints}
        self.queue = queue
        self.rng = rng
        self.delay = delay or DelayModel()
        self.schedule = schedule or PartitionSchedule()
        self.schedule.validate(self.endpoints)
        self.active: set[int] = set(self.endpoints)
        self.dropped = 0

    def deactivate(self, endpoint: int) -> None:
        """Take an endpoint off the network (dormant or retired clone)."""
        self.active.discard(endpoint)

    def reachable(self, sender: int, receiver: int, clock_ms: int) -> bool:
        """Whether a message from ``sender`` can reach ``receiver`` at ``clock_ms``."""
        if sender not in self.active or receiver not in self.active:
            return False
        window = self.schedule.window_at(clock_ms)
        if window is None:
            return True
        return window.group_of(sender) == window.group_of(receiver)

    def peers(self, sender: int, clock_ms: int) -> list[int]:
        """Endpoints reachable from ``sender``, in id order."""
        return [
            endpoint
            for endpoint in sorted(self.active)
            if endpoint != sender and self.reachable(sender, endpoint, clock_ms)
        ]

    def broadcast(self, sender: int, view: ChainView, clock_ms: int) -> list[Event]:
        """
        Send ``view`` to every reachable endpoint.

        Returns:
            The scheduled DELIVER events, one per reachable peer.

        """
        events = []
        for receiver in self.peers(sender, clock_ms):
            delay = self.delay.sample(self.rng)
            events.append(
                self.queue.push(
                    clock_ms + delay,
                    EventKind.DELIVER,
                    endpoint=receiver,
                    sender=sender,
                    view=view,
                )
            )
        return events

    def deliverable(self, event: Event) -> bool:
        """Re-check reachability when a DELIVER fires."""
        if event.sender is None or event.endpoint is None:
            raise SimulationError(f"DELIVER event {event.sequence} lacks endpoints")
        if self.reachable(event.sender, event.endpoint, event.fire_ms):
            return True
        self.dropped += 1
        return False

    def activate_clone(self, binding: CloneBinding, clock_ms: int) -> None:
        """
        Bring the clone endpoint online at a partition window start.

        The caller copies the original's view into the clone; this records
        the split time and reconnects the clone.

        Raises:
            ConfigError: If ``clock_ms`` is not the start of a window or the
                two endpoints are not in different groups of that window.

        """
        window = self.schedule.starting_at(clock_ms)
        if window is None:
            raise ConfigError(
                f"Clone of {binding.sealer} activated at {clock_ms} ms, "
                "which is not a partition window start"
            )
        original_group = window.group_of(binding.original)
        clone_group = window.group_of(binding.clone)
        if None in (original_group, clone_group) or original_group == clone_group:
            raise ConfigError(
                f"Clone endpoints {binding.endpoints} of {binding.sealer} "
                "must sit in different partition groups"
            )
        binding.split_at_ms = clock_ms
        self.active.add(binding.clone)
        logger.debug(
            f"Activated clone {binding.clone} of {binding.sealer} at {clock_ms}"
        )

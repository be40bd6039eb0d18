"""Tests for the event queue, the partitioned network and the trace log."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poasim.chain.models import ChainView, Protocol, SealerId
from poasim.errors import ConfigError, SimulationError
from poasim.net.events import RANK_LATE_TIMER, EventKind, EventQueue
from poasim.net.network import (
    CloneBinding,
    DelayModel,
    Network,
    NodeEndpoint,
    PartitionSchedule,
    PartitionWindow,
)
from poasim.net.trace import TraceLog

GENESIS = ChainView.from_genesis(Protocol.AURA)


def _window(start: int, end: int, *groups: set[int]) -> PartitionWindow:
    return PartitionWindow(start, end, tuple(frozenset(g) for g in groups))


def _network(count: int, *windows: PartitionWindow, seed: int = 0) -> Network:
    return Network(
        [NodeEndpoint(i, SealerId(i)) for i in range(count)],
        EventQueue(),
        np.random.default_rng(seed),
        schedule=PartitionSchedule(list(windows)),
    )


class TestEventQueue:
    """Total event order."""

    def test_same_millisecond_order_follows_rank(self) -> None:
        """Partition edges, injections, deliveries, then timers."""
        queue = EventQueue()
        queue.push(10, EventKind.TIMER, rank=RANK_LATE_TIMER)
        queue.push(10, EventKind.TIMER)
        queue.push(10, EventKind.DELIVER)
        queue.push(10, EventKind.INJECT_TX)
        queue.push(10, EventKind.PARTITION_EDGE)
        queue.push(5, EventKind.TIMER)
        order = [(e.fire_ms, e.kind, e.rank) for e in (queue.pop() for _ in range(6))]
        assert order == [
            (5, EventKind.TIMER, 3),
            (10, EventKind.PARTITION_EDGE, 0),
            (10, EventKind.INJECT_TX, 1),
            (10, EventKind.DELIVER, 2),
            (10, EventKind.TIMER, 3),
            (10, EventKind.TIMER, RANK_LATE_TIMER),
        ]
        assert len(queue) == 0

    @given(st.lists(st.integers(min_value=0, max_value=50), min_size=1, max_size=40))
    @settings(max_examples=50)
    def test_ties_break_by_creation_order(self, times: list[int]) -> None:
        """Equal keys pop in the order they were pushed."""
        queue = EventQueue()
        for t in times:
            queue.push(t, EventKind.DELIVER)
        popped = [queue.pop() for _ in times]
        keys = [(e.fire_ms, e.sequence) for e in popped]
        assert keys == sorted(keys)

    def test_no_scheduling_into_the_past(self) -> None:
        """Once time advanced, earlier events are refused."""
        queue = EventQueue()
        queue.push(100, EventKind.TIMER)
        queue.pop()
        with pytest.raises(SimulationError):
            queue.push(99, EventKind.TIMER)
        assert queue.push(100, EventKind.TIMER).fire_ms == 100
        assert queue.peek_ms() == 100


class TestPartitionSchedule:
    """Window validation and lookup."""

    @pytest.mark.parametrize(
        ("windows", "fragment"),
        [
            ([_window(0, 10, {0, 1}, {1, 2})], "overlap on [1]"),
            ([_window(0, 10, {0, 1})], "missing [2]"),
            ([_window(5, 5, {0, 1}, {2})], "zero or negative"),
            (
                [_window(0, 10, {0}, {1, 2}), _window(5, 20, {0}, {1, 2})],
                "overlaps the previous window",
            ),
        ],
    )
    def test_invalid_windows(
        self, windows: list[PartitionWindow], fragment: str
    ) -> None:
        """Each problem is reported in the error details."""
        with pytest.raises(ConfigError) as excinfo:
            PartitionSchedule(windows).validate(range(3))
        assert any(fragment in line for line in excinfo.value.details)

    def test_window_lookup_is_half_open(self) -> None:
        """A window is in force from its start up to, not including, its end."""
        schedule = PartitionSchedule([_window(10, 20, {0}, {1})])
        assert schedule.window_at(9) is None
        assert schedule.window_at(10) is not None
        assert schedule.window_at(20) is None
        assert schedule.starting_at(10) is schedule.windows[0]

    def test_close_shortens_a_window(self) -> None:
        """Early heals move the end forward, never past it."""
        schedule = PartitionSchedule([_window(10, 20, {0}, {1})])
        closed = schedule.close(schedule.windows[0], 15)
        assert (closed.start_ms, closed.end_ms) == (10, 15)
        with pytest.raises(SimulationError):
            schedule.close(closed, 30)


class TestNetwork:
    """Broadcasts, drops and clone activation."""

    def test_broadcast_reaches_every_peer_with_bounded_delay(self) -> None:
        """Without partitions each peer gets one delivery in [50, 60] ms."""
        network = _network(4)
        events = network.broadcast(0, GENESIS, 1000)
        assert [e.endpoint for e in events] == [1, 2, 3]
        assert all(1050 <= e.fire_ms <= 1060 for e in events)
        assert all(e.sender == 0 and e.view is GENESIS for e in events)

    def test_partition_blocks_cross_group_sends(self) -> None:
        """Only same-group peers are addressed during a window."""
        network = _network(3, _window(0, 100, {0, 1}, {2}))
        assert [e.endpoint for e in network.broadcast(0, GENESIS, 0)] == [1]
        assert network.peers(2, 50) == []
        assert network.peers(2, 100) == [0, 1]

    def test_messages_in_flight_are_dropped_at_delivery(self) -> None:
        """A message that lands inside a window across groups is lost."""
        network = _network(3, _window(30, 100, {0, 1}, {2}))
        events = network.broadcast(0, GENESIS, 0)
        by_receiver = {e.endpoint: e for e in events}
        assert network.deliverable(by_receiver[1])
        assert not network.deliverable(by_receiver[2])
        assert network.dropped == 1

    def test_inactive_endpoints_are_unreachable(self) -> None:
        """Deactivated endpoints neither send nor receive."""
        network = _network(3)
        network.deactivate(2)
        assert network.peers(0, 0) == [1]
        assert network.broadcast(2, GENESIS, 0) == []

    def test_clone_activation(self) -> None:
        """Clones start only at a window start and across groups."""
        network = _network(4, _window(100, 200, {0, 1}, {2, 3}))
        network.deactivate(3)
        binding = CloneBinding(SealerId(1), (1, 3))
        with pytest.raises(ConfigError):
            network.activate_clone(binding, 50)
        network.activate_clone(binding, 100)
        assert 3 in network.active
        assert binding.split_at_ms == 100
        assert (binding.original, binding.clone) == (1, 3)
        with pytest.raises(ConfigError):
            network.activate_clone(CloneBinding(SealerId(2), (2, 3)), 100)


class TestDelayModel:
    """Message delays."""

    def test_defaults(self) -> None:
        """Fifty milliseconds plus up to ten of jitter."""
        model = DelayModel()
        assert (model.base_delay_ms, model.max_delay_ms) == (50, 60)

    def test_no_jitter_is_constant(self) -> None:
        """Zero jitter never consumes randomness."""
        rng = np.random.default_rng(1)
        assert DelayModel(20, 0).sample(rng) == 20

    @given(st.integers(min_value=0, max_value=2**32))
    @settings(max_examples=25)
    def test_samples_stay_in_range(self, seed: int) -> None:
        """Draws land in [base, base + jitter]."""
        rng = np.random.default_rng(seed)
        model = DelayModel(50, 10)
        assert all(50 <= model.sample(rng) <= 60 for _ in range(20))

    def test_negative_delays_are_rejected(self) -> None:
        """Neither part may be negative."""
        with pytest.raises(ConfigError):
            DelayModel(-1, 0)
        with pytest.raises(ConfigError):
            DelayModel(0, -1)


def test_trace_line_format() -> None:
    """Trace lines read ``fire_ms seq kind endpoint detail``."""
    queue = EventQueue()
    log = TraceLog()
    log.record(queue.push(40, EventKind.INJECT_TX), "alice#0")
    log.record(queue.push(50, EventKind.DELIVER, endpoint=2), "head=abc")
    assert log.text() == "40 0 INJECT_TX - alice#0\n50 1 DELIVER 2 head=abc\n"

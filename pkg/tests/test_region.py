"""Tests for the safety/liveness classification and the attack bounds."""

from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poasim.analysis.region import (
    Sync,
    is_live,
    is_safe,
    max_victim_gain,
    min_aura_attack_duration,
    min_clique_blind_gain,
    region_rows,
    render_region_svg,
    safe_live_region,
    safe_live_v_set,
)
from poasim.errors import ConfigError


@st.composite
def grid_points(draw: st.DrawFn) -> tuple[int, int, int]:
    """A valid ``(n, t, V)`` triple."""
    n = draw(st.integers(min_value=1, max_value=40))
    t = draw(st.integers(min_value=0, max_value=n))
    v = draw(st.integers(min_value=1, max_value=n))
    return n, t, v


@pytest.mark.parametrize(
    ("t", "expected"),
    [(0, {5, 6, 7, 8}), (1, {6, 7}), (2, {6}), (3, set()), (4, set())],
)
def test_nine_sealers_partial_synchrony(t: int, expected: set[int]) -> None:
    """The safe-and-live thresholds shrink to nothing at t=3."""
    assert safe_live_v_set(9, t, Sync.PARTIAL) == expected


def test_liveness_is_strict() -> None:
    """V = n - t is not live."""
    assert is_live(9, 2, 6)
    assert not is_live(9, 2, 7)


def test_synchronous_bound() -> None:
    """Under synchrony V > t is enough, even with everyone but one Byzantine."""
    assert is_safe(9, 8, 9, Sync.SYNCHRONOUS)
    assert not is_safe(9, 8, 8, Sync.SYNCHRONOUS)
    assert not is_safe(9, 8, 8, Sync.PARTIAL)


def test_only_threshold_five_is_unsafe_among_five_to_seven() -> None:
    """With one or two clones, V=5 is unsafe and V=6 or 7 is safe."""
    for t in (1, 2):
        assert [is_safe(9, t, v, Sync.PARTIAL) for v in (5, 6, 7)] == [
            False,
            True,
            True,
        ]


@pytest.mark.parametrize(
    ("n", "t", "v"), [(9, 10, 5), (9, 1, 0), (9, 1, 10), (0, 0, 1)]
)
def test_out_of_range_points(n: int, t: int, v: int) -> None:
    """Grid coordinates outside 0 <= t <= n, 1 <= V <= n are rejected."""
    with pytest.raises(ConfigError):
        is_safe(n, t, v, Sync.PARTIAL)


@given(grid_points(), st.sampled_from(list(Sync)))
@settings(max_examples=100)
def test_safety_grows_with_v(point: tuple[int, int, int], sync: Sync) -> None:
    """Raising V never breaks safety; lowering it never breaks liveness."""
    n, t, v = point
    if v < n and is_safe(n, t, v, sync):
        assert is_safe(n, t, v + 1, sync)
    if v > 1 and is_live(n, t, v):
        assert is_live(n, t, v - 1)


@given(grid_points())
@settings(max_examples=100)
def test_partial_synchrony_is_stricter(point: tuple[int, int, int]) -> None:
    """Whatever is safe under partial synchrony is safe under synchrony."""
    n, t, v = point
    if is_safe(n, t, v, Sync.PARTIAL):
        assert is_safe(n, t, v, Sync.SYNCHRONOUS)


def test_region_grid_and_rows() -> None:
    """One point per (t, V), rows as 0/1 flags ordered by t then V."""
    points = safe_live_region(9, Sync.PARTIAL)
    assert len(points) == 10 * 9
    rows = region_rows(points)
    assert rows[0] == {"n": 9, "t": 0, "V": 1, "safe": 0, "live": 1}
    assert rows[-1] == {"n": 9, "t": 9, "V": 9, "safe": 0, "live": 0}


def test_region_svg_is_reproducible(tmp_path: Path) -> None:
    """Rendering twice gives the same bytes."""
    points = safe_live_region(5, Sync.PARTIAL)
    first = render_region_svg(points, tmp_path / "a.svg").read_bytes()
    second = render_region_svg(points, tmp_path / "b.svg").read_bytes()
    assert first.startswith(b"<?xml")
    assert first == second


def test_attack_bounds() -> None:
    """Closed-form bounds for n=9."""
    assert min_aura_attack_duration(9, 3000) == 30_000
    assert max_victim_gain(9) == 10
    assert min_clique_blind_gain(9) == 11

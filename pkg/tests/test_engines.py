"""Tests for the Aura and Clique sealer state machines."""

from __future__ import annotations

from collections.abc import Callable

import numpy as np
import pytest
from conftest import aura_chain, clique_chain

from poasim.chain.models import Block, ChainView, Protocol, SealerId, Transaction
from poasim.engines.aura import (
    AuraConfig,
    AuraSealerState,
    current_step,
    next_turn_ms,
    on_deliver_aura,
    propose_aura,
)
from poasim.engines.clique import (
    IN_ORDER_WEIGHT,
    OUT_OF_ORDER_WEIGHT,
    CliqueConfig,
    CliqueSealerState,
    fire_seal,
    on_deliver_clique,
    schedule_seal,
    signed_recently,
)
from poasim.errors import ConfigError


def _highest(low: int, high: int) -> int:
    return high


def _aura(index: int, n: int = 3, view: ChainView | None = None) -> AuraSealerState:
    return AuraSealerState(
        id=SealerId(index),
        view=view or ChainView.from_genesis(Protocol.AURA),
        config=AuraConfig(n=n, step_duration_ms=1000),
    )


def _clique(
    index: int,
    n: int = 3,
    view: ChainView | None = None,
    scripted: dict[tuple[int, int], int] | None = None,
) -> CliqueSealerState:
    return CliqueSealerState(
        id=SealerId(index),
        view=view or ChainView.from_genesis(Protocol.CLIQUE),
        config=CliqueConfig(n=n, block_period_ms=1000, scripted_delays=scripted or {}),
    )


class TestAura:
    """Step ownership, sealing and view adoption."""

    def test_config_validation(self) -> None:
        """Non-positive sizes and out-of-range identities are rejected."""
        with pytest.raises(ConfigError):
            AuraConfig(n=0, step_duration_ms=1000)
        with pytest.raises(ConfigError):
            AuraConfig(n=3, step_duration_ms=0)
        with pytest.raises(ConfigError):
            _aura(3, n=3)

    @pytest.mark.parametrize(
        ("index", "clock", "expected"),
        [
            (1, 0, 1000),
            (0, 0, 3000),
            (2, 2500, 2500),
            (0, 3000, 3000),
        ],
    )
    def test_next_turn(self, index: int, clock: int, expected: int) -> None:
        """The next own step start, or now when the own step is open."""
        assert next_turn_ms(_aura(index), clock) == expected

    def test_next_turn_skips_sealed_step(self) -> None:
        """After sealing, the following own step is a full rotation later."""
        state = _aura(2)
        assert propose_aura(state, 2500) is not None
        assert next_turn_ms(state, 2500) == 5000

    def test_current_step(self) -> None:
        """Steps are clock divided by the step duration."""
        assert current_step(7000, AuraConfig(n=3, step_duration_ms=3000)) == 2

    def test_propose_only_in_turn_and_once(self) -> None:
        """A sealer seals once per own step and never out of turn."""
        state = _aura(1)
        block = propose_aura(state, 1000)
        assert block is not None
        assert (block.step, block.timestamp, block.height) == (1, 1000, 1)
        assert state.view.head == block.id
        assert propose_aura(state, 1500) is None
        assert propose_aura(_aura(2), 1000) is None

    def test_propose_includes_valid_pending_txs(self) -> None:
        """Pending transactions go through the nonce filter."""
        first = Transaction("alice", "merchant", 1, 0)
        gap = Transaction("alice", "merchant", 1, 5)
        block = propose_aura(_aura(1), 1000, [first, gap])
        assert block is not None
        assert block.txs == (first,)

    def test_adopts_only_strictly_better_views(self) -> None:
        """A denser branch replaces a sparser one, not the other way round."""
        dense = aura_chain([1], n=3)
        sparse = aura_chain([4], n=3)
        state = _aura(2, view=sparse)
        assert on_deliver_aura(state, dense)
        assert state.view is dense
        assert not on_deliver_aura(state, sparse)
        assert not on_deliver_aura(state, dense)

    def test_rejects_out_of_turn_blocks(self) -> None:
        """Blocks sealed outside their sealer's step are invalid."""
        genesis = Block.genesis(Protocol.AURA)
        rogue = ChainView.from_genesis(Protocol.AURA).with_block(
            Block.seal_aura(genesis, SealerId(0), step=1, timestamp=1000)
        )
        state = _aura(2)
        assert not on_deliver_aura(state, rogue)
        assert state.view.height == 0


class TestClique:
    """Sealer limit, scheduling, firing and weight-based adoption."""

    def test_config_defaults_to_majority_limit(self) -> None:
        """The sealer limit is floor(n/2)+1 and nothing else."""
        config = CliqueConfig(n=9)
        assert config.sealer_limit == 5
        assert config.max_out_of_order_delay_ms == 2500
        with pytest.raises(ConfigError):
            CliqueConfig(n=4, sealer_limit=2)

    def test_signed_recently_window(self) -> None:
        """With n=9 a sealer waits for four other blocks."""
        four = clique_chain([1, 2, 3, 4], n=9)
        five = clique_chain([5], n=9, base=four)
        assert signed_recently(four, SealerId(1), 5)
        assert not signed_recently(five, SealerId(1), 5)
        assert not signed_recently(four, SealerId(6), 5)

    def test_in_order_seal_fires_at_the_period(self) -> None:
        """The in-turn sealer seals at parent timestamp plus period, weight 2."""
        state = _clique(1)
        plan = schedule_seal(state, 0, _highest)
        assert plan is not None
        assert (plan.fire_ms, plan.weight) == (1000, IN_ORDER_WEIGHT)
        assert plan.timestamp == 1000
        assert fire_seal(state, 999) is None
        block = fire_seal(state, 1000)
        assert block is not None
        assert (block.number, block.weight, block.timestamp) == (1, 2, 1000)
        assert state.pending_seal is None

    def test_out_of_order_seal_waits(self) -> None:
        """Other sealers add the drawn delay and seal with weight 1."""
        plan = schedule_seal(_clique(2), 0, _highest)
        assert plan is not None
        assert (plan.fire_ms, plan.weight, plan.timestamp) == (
            2000,
            OUT_OF_ORDER_WEIGHT,
            1000,
        )

    def test_scripted_delays(self) -> None:
        """Scripts replace the draw out of order and lag in-order seals."""
        scripted = {(2, 1): 300, (1, 1): 250}
        out_of_order = schedule_seal(_clique(2, scripted=scripted), 0, _highest)
        in_order = schedule_seal(_clique(1, scripted=scripted), 0, _highest)
        assert out_of_order is not None and out_of_order.fire_ms == 1300
        assert in_order is not None and in_order.fire_ms == 1250
        assert in_order.weight == IN_ORDER_WEIGHT

    def test_out_of_order_delay_mean(self) -> None:
        """With n=9 the drawn delays average half of 2500 ms."""
        rng = np.random.default_rng(2024)

        def draw(low: int, high: int) -> int:
            return int(rng.integers(low, high + 1))

        state = _clique(3, n=9)
        delays = []
        for _ in range(10_000):
            plan = schedule_seal(state, 0, draw)
            assert plan is not None and plan.weight == OUT_OF_ORDER_WEIGHT
            delays.append(plan.fire_ms - plan.timestamp)
        assert min(delays) >= 0 and max(delays) <= 2500
        assert float(np.mean(delays)) == pytest.approx(1250, rel=0.03)

    def test_recent_signer_does_not_schedule(self) -> None:
        """A sealer inside its limit window has no pending seal."""
        state = _clique(1, view=clique_chain([1], n=3))
        assert schedule_seal(state, 0, _highest) is None
        assert state.pending_seal is None

    def test_adopting_a_block_cancels_the_pending_seal(self) -> None:
        """A competing block arriving first cancels the slower seal."""
        state = _clique(2)
        schedule_seal(state, 0, _highest)
        assert on_deliver_clique(state, clique_chain([1], n=3))
        assert state.pending_seal is None
        assert fire_seal(state, 5000) is None

    def test_adopts_only_heavier_views(self) -> None:
        """Weight decides; ties keep the local view."""
        heavy = clique_chain([1], n=3)
        light = clique_chain([2], n=3)
        also_light = clique_chain([0], n=3)
        state = _clique(0, view=light)
        assert not on_deliver_clique(state, also_light)
        assert on_deliver_clique(state, heavy)
        assert not on_deliver_clique(state, light)
        assert state.view is heavy

    @pytest.mark.parametrize(
        "bad",
        [
            pytest.param(
                lambda g: Block.seal_clique(g, SealerId(1), weight=1, timestamp=1000),
                id="wrong-weight",
            ),
            pytest.param(
                lambda g: Block.seal_clique(g, SealerId(1), weight=2, timestamp=10),
                id="period",
            ),
        ],
    )
    def test_rejects_invalid_blocks(self, bad: Callable[[Block], Block]) -> None:
        """Wrong weights and early timestamps fail validation."""
        genesis = Block.genesis(Protocol.CLIQUE)
        view = ChainView.from_genesis(Protocol.CLIQUE).with_block(bad(genesis))
        state = _clique(0)
        assert not on_deliver_clique(state, view)
        assert state.view.height == 0

    def test_rejects_sealer_limit_violations(self) -> None:
        """Two consecutive blocks by one sealer break the n=3 limit."""
        state = _clique(0)
        assert not on_deliver_clique(state, clique_chain([1, 1], n=3))

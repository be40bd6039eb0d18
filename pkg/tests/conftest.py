"""Shared builders for the poasim test suite."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from typing import Any

import pytest

from poasim.chain.models import Block, ChainView, Protocol, SealerId, Transaction
from poasim.utils.config_loader import ScenarioConfig


def aura_chain(
    steps: Iterable[int],
    n: int,
    step_ms: int = 1000,
    base: ChainView | None = None,
    txs: dict[int, Sequence[Transaction]] | None = None,
) -> ChainView:
    """A single-branch Aura view with one in-turn block per listed step."""
    view = base or ChainView.from_genesis(Protocol.AURA)
    for step in steps:
        block = Block.seal_aura(
            view.head_block,
            SealerId(step % n),
            step=step,
            timestamp=step * step_ms,
            txs=(txs or {}).get(step, ()),
        )
        view = view.with_block(block)
    return view


def clique_chain(
    sealers: Iterable[int],
    n: int,
    period_ms: int = 1000,
    base: ChainView | None = None,
) -> ChainView:
    """A single-branch Clique view; weights follow the in-order rule."""
    view = base or ChainView.from_genesis(Protocol.CLIQUE)
    for sealer in sealers:
        head = view.head_block
        number = (head.number or 0) + 1
        weight = 2 if number % n == sealer else 1
        block = Block.seal_clique(
            head, SealerId(sealer), weight=weight, timestamp=head.timestamp + period_ms
        )
        view = view.with_block(block)
    return view


def scenario(**fields: Any) -> ScenarioConfig:
    """Validate a scenario from keyword fields."""
    return ScenarioConfig.model_validate(fields)


@pytest.fixture
def alice_pays_merchant() -> Transaction:
    """A first spend by alice."""
    return Transaction("alice", "merchant", 100, 0)


@pytest.fixture
def alice_pays_herself() -> Transaction:
    """The conflicting spend of the same nonce."""
    return Transaction("alice", "alice-2", 100, 0)

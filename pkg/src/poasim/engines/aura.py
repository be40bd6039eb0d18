"""
Aura sealer state machine.

Sealers take turns by step (``step mod n``), extend their head once per own
step and adopt any delivered view with a strictly higher fork rank.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

from poasim.chain.fork_choice import fork_rank
from poasim.chain.models import (
    Block,
    ChainView,
    DecisionRule,
    Protocol,
    SealerId,
    Transaction,
)
from poasim.chain.txs import valid_extension
from poasim.errors import ChainStructureError, ConfigError, InvalidBlockError
from poasim.tools.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class AuraConfig:
    """Static Aura parameters."""

    n: int
    step_duration_ms: int
    decision_rule: DecisionRule = field(
        default_factory=lambda: DecisionRule.for_protocol(Protocol.AURA)
    )

    def __post_init__(self) -> None:
        """Validate the sealer count and step duration."""
        if self.n < 1:
            raise ConfigError(f"Aura needs at least one sealer, got n={self.n}")
        if self.step_duration_ms <= 0:
            raise ConfigError(
                f"step_duration_ms must be positive, got {self.step_duration_ms}"
            )
        self.decision_rule.validate(self.n)


@dataclass
class AuraSealerState:
    """One sealer's local state."""

    id: SealerId
    view: ChainView
    config: AuraConfig
    last_sealed_step: int | None = None

    def __post_init__(self) -> None:
        """Reject identities outside the sealer set."""
        if not 0 <= self.id.index < self.config.n:
            raise ConfigError(f"{self.id} is outside [0, {self.config.n})")


def current_step(clock_ms: int, config: AuraConfig) -> int:
    """Step index at ``clock_ms``."""
    return clock_ms // config.step_duration_ms


def my_turn(step: int, id: SealerId, n: int) -> bool:  # noqa: A002
    """True when ``id`` owns ``step``."""
    return step % n == id.index


def next_turn_ms(state: AuraSealerState, clock_ms: int) -> int:
    """
    When the sealer should next try to seal.

    That is the start of its first own step that is not yet sealed and not
    before the current one, or ``clock_ms`` itself when the current step is
    its own and still open. Step 0 belongs to genesis.
    """
    n = state.config.n
    step = max(current_step(clock_ms, state.config), 1)
    if state.last_sealed_step is not None:
        step = max(step, state.last_sealed_step + 1)
    step += (state.id.index - step) % n
    return max(step * state.config.step_duration_ms, clock_ms)


def propose_aura(
    state: AuraSealerState, clock_ms: int, pending_txs: Sequence[Transaction] = ()
) -> Block | None:
    """
    Seal a block if the current step belongs to this sealer.

    At most one block is sealed per own step, and never at or below the
    head's step. The sealer's view is extended with the new block.
    """
    step = current_step(clock_ms, state.config)
    if not my_turn(step, state.id, state.config.n):
        return None
    if state.last_sealed_step == step:
        return None
    head = state.view.head_block
    if step <= (head.step or 0):
        return None
    block = Block.seal_aura(
        head,
        state.id,
        step=step,
        timestamp=clock_ms,
        txs=valid_extension(state.view, pending_txs),
    )
    state.view = state.view.with_block(block)
    state.last_sealed_step = step
    return block


def validate_aura_view(incoming: ChainView, local: ChainView, n: int) -> None:
    """
    Validation gate for a delivered view.

    Blocks already known locally are trusted; every other canonical block
    must come from a known sealer, in its own turn, with a step above its
    parent's.

    Raises:
        ChainStructureError: If the view is malformed.
        InvalidBlockError: If a block breaks the Aura rules.

    """
    branch = incoming.canonical
    if branch[0].id not in local.blocks:
        raise ChainStructureError("Incoming view has a different genesis")
    for parent, block in zip(branch, branch[1:]):
        if block.id in local.blocks:
            continue
        if block.sealer is None or not 0 <= block.sealer.index < n:
            raise InvalidBlockError(f"Block {block.id} has an unknown sealer")
        if block.step is None or not my_turn(block.step, block.sealer, n):
            raise InvalidBlockError(
                f"Block {block.id} by {block.sealer} is out of turn "
                f"at step {block.step}"
            )
        if block.step <= (parent.step or 0):
            raise InvalidBlockError(
                f"Block {block.id} step {block.step} does not follow {parent.step}"
            )


def on_deliver_aura(state: AuraSealerState, incoming: ChainView) -> bool:
    """
    Adopt ``incoming`` iff it ranks strictly higher than the local view.

    Invalid views are rejected and leave the local view unchanged.
    """
    if incoming is state.view or incoming.head == state.view.head:
        return False
    n = state.config.n
    try:
        validate_aura_view(incoming, state.view, n)
    except (ChainStructureError, InvalidBlockError) as e:
        logger.debug(f"{state.id} rejected view {incoming.head}: {e}")
        return False
    rule = state.config.decision_rule
    if fork_rank(incoming, Protocol.AURA, rule, n) > fork_rank(
        state.view, Protocol.AURA, rule, n
    ):
        state.view = incoming
        return True
    return False

"""
Clique sealer state machine.

Sealers may seal block N unless they sealed one of the previous
``sealer_limit - 1`` blocks. The in-order sealer (``N mod n``) seals as
soon as the block period has elapsed with weight 2; any other eligible
sealer waits a random delay and seals with weight 1. Views are adopted
when strictly heavier.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
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
from poasim.sim_config import DEFAULT_CLIQUE
from poasim.tools.logger import get_logger

logger = get_logger(__name__)

IN_ORDER_WEIGHT = 2
OUT_OF_ORDER_WEIGHT = 1

# Draws an integer uniformly from the inclusive range [low, high].
RandDraw = Callable[[int, int], int]


@dataclass(frozen=True)
class CliqueConfig:
    """
    Static Clique parameters.

    ``scripted_delays`` maps ``(sealer index, block number)`` to a fixed seal
    delay in ms: it replaces the random draw of an out-of-order seal and is
    added as a lag to an in-order one.
    """

    n: int
    block_period_ms: int = DEFAULT_CLIQUE["block_period_ms"]
    sealer_limit: int | None = None
    wiggle_unit_ms: int = DEFAULT_CLIQUE["wiggle_unit_ms"]
    decision_rule: DecisionRule = field(
        default_factory=lambda: DecisionRule.for_protocol(Protocol.CLIQUE)
    )
    scripted_delays: Mapping[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Fill in the sealer limit and check the invariants."""
        if self.n < 1:
            raise ConfigError(f"Clique needs at least one sealer, got n={self.n}")
        if self.block_period_ms <= 0:
            raise ConfigError(
                f"block_period_ms must be positive, got {self.block_period_ms}"
            )
        if self.sealer_limit is None:
            object.__setattr__(self, "sealer_limit", self.majority)
        if self.sealer_limit != self.majority:
            raise ConfigError(
                f"sealer_limit must equal the majority {self.majority}, "
                f"got {self.sealer_limit}"
            )
        self.decision_rule.validate(self.n)

    @property
    def majority(self) -> int:
        """``floor(n/2) + 1``."""
        return self.n // 2 + 1

    @property
    def max_out_of_order_delay_ms(self) -> int:
        """Upper bound of the out-of-order random delay."""
        return self.wiggle_unit_ms * self.majority


@dataclass(frozen=True)
class ScheduledSeal:
    """A pending seal for block ``number`` on top of ``parent_id``."""

    fire_ms: int
    weight: int
    number: int
    parent_id: str
    timestamp: int


@dataclass
class CliqueSealerState:
    """One sealer's local state."""

    id: SealerId
    view: ChainView
    config: CliqueConfig
    pending_seal: ScheduledSeal | None = None

    def __post_init__(self) -> None:
        """Reject identities outside the sealer set."""
        if not 0 <= self.id.index < self.config.n:
            raise ConfigError(f"{self.id} is outside [0, {self.config.n})")


def signed_recently(view: ChainView, id: SealerId, limit: int) -> bool:  # noqa: A002
    """
    True when ``id`` sealed one of the last ``limit - 1`` canonical blocks.

    Those are blocks N-limit+1 .. N-1 for the candidate number N, so a
    sealer's blocks end up at least ``limit`` numbers apart.
    """
    if limit <= 1:
        return False
    recent = view.canonical[-(limit - 1) :]
    return any(block.sealer == id for block in recent if not block.is_genesis)


def in_order(next_number: int, id: SealerId, n: int) -> bool:  # noqa: A002
    """True when ``id`` is the in-turn sealer for ``next_number``."""
    return next_number % n == id.index


def schedule_seal(
    state: CliqueSealerState, clock_ms: int, rand_draw: RandDraw
) -> ScheduledSeal | None:
    """
    Plan the sealer's attempt at the next block, or nothing if it must wait.

    The block is stamped ``max(clock, head.timestamp + period)``. In-order
    seals fire at that time with weight 2; out-of-order seals add a delay
    drawn from ``[0, wiggle_unit * majority]`` and carry weight 1. The plan
    is stored on the state.
    """
    config = state.config
    head = state.view.head_block
    if signed_recently(state.view, state.id, config.sealer_limit or 1):
        state.pending_seal = None
        return None
    number = (head.number or 0) + 1
    earliest = max(clock_ms, head.timestamp + config.block_period_ms)
    scripted = config.scripted_delays.get((state.id.index, number))
    if in_order(number, state.id, config.n):
        weight = IN_ORDER_WEIGHT
        delay = scripted or 0
    else:
        weight = OUT_OF_ORDER_WEIGHT
        if scripted is not None:
            delay = scripted
        else:
            delay = rand_draw(0, config.max_out_of_order_delay_ms)
    state.pending_seal = ScheduledSeal(
        fire_ms=earliest + delay,
        weight=weight,
        number=number,
        parent_id=head.id,
        timestamp=earliest,
    )
    return state.pending_seal


def fire_seal(
    state: CliqueSealerState, clock_ms: int, pending_txs: Sequence[Transaction] = ()
) -> Block | None:
    """
    Seal the pending block if its slot is still open.

    A pending seal whose parent is no longer the head (a competing block was
    adopted meanwhile) is cancelled.
    """
    pending = state.pending_seal
    if pending is None or clock_ms < pending.fire_ms:
        return None
    state.pending_seal = None
    head = state.view.head_block
    if head.id != pending.parent_id:
        return None
    block = Block.seal_clique(
        head,
        state.id,
        weight=pending.weight,
        timestamp=pending.timestamp,
        txs=valid_extension(state.view, pending_txs),
    )
    state.view = state.view.with_block(block)
    return block


def validate_clique_view(
    incoming: ChainView, local: ChainView, config: CliqueConfig
) -> None:
    """
    Validation gate for a delivered view.

    Unknown canonical blocks must come from a known sealer, number their
    parent plus one, weigh 2 exactly when in order, respect the block period
    and the sealer limit.

    Raises:
        ChainStructureError: If the view is malformed.
        InvalidBlockError: If a block breaks the Clique rules.

    """
    n = config.n
    limit = config.sealer_limit or 1
    branch = incoming.canonical
    if branch[0].id not in local.blocks:
        raise ChainStructureError("Incoming view has a different genesis")
    for position in range(1, len(branch)):
        block = branch[position]
        if block.id in local.blocks:
            continue
        parent = branch[position - 1]
        if block.sealer is None or not 0 <= block.sealer.index < n:
            raise InvalidBlockError(f"Block {block.id} has an unknown sealer")
        if block.number != (parent.number or 0) + 1:
            raise InvalidBlockError(
                f"Block {block.id} number {block.number} does not follow "
                f"{parent.number}"
            )
        expected = (
            IN_ORDER_WEIGHT
            if in_order(block.number, block.sealer, n)
            else OUT_OF_ORDER_WEIGHT
        )
        if block.weight != expected:
            raise InvalidBlockError(
                f"Block {block.id} weight {block.weight}, expected {expected}"
            )
        if block.timestamp < parent.timestamp + config.block_period_ms:
            raise InvalidBlockError(f"Block {block.id} violates the block period")
        window = branch[max(1, position - limit + 1) : position]
        if any(other.sealer == block.sealer for other in window):
            raise InvalidBlockError(
                f"Block {block.id} by {block.sealer} violates the sealer limit"
            )


def on_deliver_clique(state: CliqueSealerState, incoming: ChainView) -> bool:
    """
    Adopt ``incoming`` iff it ranks strictly higher (heavier) than local.

    A pending seal whose parent is no longer the head is cancelled.
    """
    if incoming is state.view or incoming.head == state.view.head:
        return False
    config = state.config
    try:
        validate_clique_view(incoming, state.view, config)
    except (ChainStructureError, InvalidBlockError) as e:
        logger.debug(f"{state.id} rejected view {incoming.head}: {e}")
        return False
    rule = config.decision_rule
    if fork_rank(incoming, Protocol.CLIQUE, rule, config.n) <= fork_rank(
        state.view, Protocol.CLIQUE, rule, config.n
    ):
        return False
    state.view = incoming
    if state.pending_seal is not None and state.pending_seal.parent_id != incoming.head:
        state.pending_seal = None
    return True

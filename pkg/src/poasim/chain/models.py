"""
Chain data model shared by the Aura and Clique engines.

Classes:
    Protocol: The two simulated Proof-of-Authority protocols.
    SealerId: Identity of an authorized sealer (shared by clones).
    Transaction: A coin transfer with a per-sender nonce.
    Block: A sealed, immutable chain element.
    ChainView: A node's local block DAG plus its selected head.
    RuleKind / DecisionRule: Block finality predicates.
"""

from __future__ import annotations

import hashlib
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

from poasim.errors import ChainStructureError, ConfigError


class Protocol(str, Enum):
    """Simulated consensus protocol."""

    AURA = "aura"
    CLIQUE = "clique"


@dataclass(frozen=True, order=True)
class SealerId:
    """Sealer identity; two endpoints may share one (a clone pair)."""

    index: int

    def __str__(self) -> str:
        """Short label used in dumps and traces."""
        return f"S{self.index}"


@dataclass(frozen=True)
class Transaction:
    """A transfer of ``amount`` coins; ``nonce`` sequences the sender's spends."""

    sender: str
    recipient: str
    amount: int
    nonce: int

    @property
    def tx_id(self) -> str:
        """Stable human-readable identifier."""
        return f"{self.sender}#{self.nonce}->{self.recipient}:{self.amount}"

    def conflicts_with(self, other: Transaction) -> bool:
        """Return True when both spend the same sender nonce differently."""
        return (
            self.sender == other.sender
            and self.nonce == other.nonce
            and (self.recipient != other.recipient or self.amount != other.amount)
        )


def _block_id(
    parent: str | None,
    sealer: SealerId | None,
    step: int | None,
    number: int | None,
    weight: int | None,
    timestamp: int,
    txs: tuple[Transaction, ...],
) -> str:
    payload = "|".join(
        [
            parent or "-",
            str(sealer.index) if sealer is not None else "-",
            str(step),
            str(number),
            str(weight),
            str(timestamp),
            ",".join(tx.tx_id for tx in txs),
        ]
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class Block:
    """
    A sealed chain element.

    Aura blocks carry ``step``; Clique blocks carry ``number`` and ``weight``.
    Genesis has no parent, no sealer and step/number 0. ``height`` is the
    distance to genesis and is fixed at sealing time.
    """

    id: str
    parent: str | None
    sealer: SealerId | None
    step: int | None
    number: int | None
    weight: int | None
    timestamp: int
    txs: tuple[Transaction, ...]
    height: int

    @classmethod
    def genesis(cls, protocol: Protocol) -> Block:
        """Build the genesis block for ``protocol``."""
        if protocol is Protocol.AURA:
            step, number, weight = 0, None, None
        else:
            step, number, weight = None, 0, 0
        return cls(
            id=_block_id(None, None, step, number, weight, 0, ()),
            parent=None,
            sealer=None,
            step=step,
            number=number,
            weight=weight,
            timestamp=0,
            txs=(),
            height=0,
        )

    @classmethod
    def seal_aura(
        cls,
        parent: Block,
        sealer: SealerId,
        step: int,
        timestamp: int,
        txs: Iterable[Transaction] = (),
    ) -> Block:
        """Seal an Aura block on top of ``parent``."""
        txs = tuple(txs)
        return cls(
            id=_block_id(parent.id, sealer, step, None, None, timestamp, txs),
            parent=parent.id,
            sealer=sealer,
            step=step,
            number=None,
            weight=None,
            timestamp=timestamp,
            txs=txs,
            height=parent.height + 1,
        )

    @classmethod
    def seal_clique(
        cls,
        parent: Block,
        sealer: SealerId,
        weight: int,
        timestamp: int,
        txs: Iterable[Transaction] = (),
    ) -> Block:
        """Seal a Clique block numbered ``parent.number + 1``."""
        if weight not in (1, 2):
            raise ChainStructureError(f"Clique weight must be 1 or 2, got {weight}")
        txs = tuple(txs)
        number = (parent.number or 0) + 1
        return cls(
            id=_block_id(parent.id, sealer, None, number, weight, timestamp, txs),
            parent=parent.id,
            sealer=sealer,
            step=None,
            number=number,
            weight=weight,
            timestamp=timestamp,
            txs=txs,
            height=parent.height + 1,
        )

    @property
    def is_genesis(self) -> bool:
        """True for the root block."""
        return self.parent is None


@dataclass(frozen=True)
class ChainView:
    """
    A node's local chain: every known block keyed by id, plus the head.

    Views are immutable values; sealing or merging returns a new view, so a
    view can be broadcast by reference.
    """

    blocks: Mapping[str, Block]
    head: str

    @classmethod
    def from_genesis(cls, protocol: Protocol) -> ChainView:
        """A view holding only the genesis block."""
        genesis = Block.genesis(protocol)
        return cls(blocks={genesis.id: genesis}, head=genesis.id)

    @classmethod
    def from_blocks(cls, blocks: Iterable[Block], head: str | None = None) -> ChainView:
        """Build a view from blocks; the head defaults to the last one given."""
        ordered = list(blocks)
        if not ordered:
            raise ChainStructureError("A chain view needs at least a genesis block")
        return cls(blocks={b.id: b for b in ordered}, head=head or ordered[-1].id)

    def with_block(self, block: Block) -> ChainView:
        """Return a new view with ``block`` added and selected as head."""
        if block.parent not in self.blocks:
            raise ChainStructureError(
                f"Block {block.id} extends unknown parent {block.parent}"
            )
        blocks = dict(self.blocks)
        blocks[block.id] = block
        return ChainView(blocks=blocks, head=block.id)

    @property
    def head_block(self) -> Block:
        """The selected tip."""
        try:
            return self.blocks[self.head]
        except KeyError as e:
            raise ChainStructureError(f"Head {self.head} is not in the view") from e

    @property
    def height(self) -> int:
        """Canonical branch length minus one."""
        return self.head_block.height

    @cached_property
    def canonical(self) -> tuple[Block, ...]:
        """Genesis-to-head path (see ``poasim.chain.fork_choice``)."""
        path: list[Block] = []
        cursor: str | None = self.head
        while cursor is not None:
            block = self.blocks.get(cursor)
            if block is None:
                raise ChainStructureError(
                    f"Block {cursor} on the head path is missing from the view"
                )
            path.append(block)
            if len(path) > len(self.blocks):
                raise ChainStructureError("Parent pointers form a cycle")
            cursor = block.parent
        path.reverse()
        if path[0].height != 0 or path[-1].height != len(path) - 1:
            raise ChainStructureError("Block heights disagree with the head path")
        return tuple(path)

    @cached_property
    def canonical_positions(self) -> dict[str, int]:
        """Map of canonical block id to its height."""
        return {block.id: i for i, block in enumerate(self.canonical)}

    @cached_property
    def canonical_tx_index(self) -> dict[str, int]:
        """Map of canonical transaction id to the height of its block."""
        index: dict[str, int] = {}
        for block in self.canonical:
            for tx in block.txs:
                index.setdefault(tx.tx_id, block.height)
        return index


class RuleKind(str, Enum):
    """Finality predicate family."""

    AURA_MAJORITY = "aura_majority"
    AURA_ROUNDS = "aura_rounds"
    CLIQUE_MAJORITY = "clique_majority"
    THRESHOLD = "threshold"


@dataclass(frozen=True)
class DecisionRule:
    """How many distinct sealers must build on a block before it is decided."""

    kind: RuleKind
    threshold: int | None = field(default=None)

    def __post_init__(self) -> None:
        """Check that THRESHOLD rules carry a threshold."""
        if self.kind is RuleKind.THRESHOLD and self.threshold is None:
            raise ConfigError("THRESHOLD decision rules need a threshold V")

    @classmethod
    def for_protocol(cls, protocol: Protocol) -> DecisionRule:
        """The rule each protocol ships with."""
        if protocol is Protocol.AURA:
            return cls(RuleKind.AURA_MAJORITY)
        return cls(RuleKind.CLIQUE_MAJORITY)

    @classmethod
    def threshold_rule(cls, v: int) -> DecisionRule:
        """A countermeasure rule requiring ``v`` distinct sealers."""
        return cls(RuleKind.THRESHOLD, v)

    def validate(self, n: int) -> None:
        """Raise ConfigError unless the rule is usable with ``n`` sealers."""
        if self.kind is RuleKind.THRESHOLD and not 1 <= (self.threshold or 0) <= n:
            raise ConfigError(
                f"Decision threshold V={self.threshold} must lie in [1, {n}]"
            )

    @property
    def is_final(self) -> bool:
        """Whether honest nodes refuse to revert blocks this rule decided."""
        return self.kind is RuleKind.THRESHOLD

    def label(self) -> str:
        """Short text form used in CSVs and dumps."""
        if self.kind is RuleKind.THRESHOLD:
            return f"threshold:{self.threshold}"
        return self.kind.value

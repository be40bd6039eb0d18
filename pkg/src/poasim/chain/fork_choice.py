"""
Fork-choice scoring and block finality predicates.

Functions:
    canonical_branch: Genesis-to-head path of a view.
    aura_score: Aura's height-dominant, density-preferring score.
    clique_total_weight: Sum of Clique block weights on the canonical branch.
    distinct_sealers_since: Sealers of a block and its canonical descendants.
    is_decided: Whether a canonical block is final under a decision rule.
    decided_height: Height of the deepest decided canonical block.
    fork_rank: Comparable key used by the deliver rules.
"""

from __future__ import annotations

from bisect import bisect_right

from poasim.chain.models import (
    Block,
    ChainView,
    DecisionRule,
    Protocol,
    RuleKind,
    SealerId,
)
from poasim.errors import BlockQueryError

UINT128_MAX = 2**128 - 1


def canonical_branch(view: ChainView) -> list[Block]:
    """
    Return the genesis-to-head path of ``view``.

    Raises:
        ChainStructureError: If the head is unreachable from genesis.

    """
    return list(view.canonical)


def aura_score(view: ChainView) -> int:
    """Score ``UINT128_MAX * height - head_step``; taller, then denser, wins."""
    head = view.head_block
    return UINT128_MAX * head.height - (head.step or 0)


def clique_total_weight(view: ChainView) -> int:
    """Sum of block weights along the canonical branch (genesis weighs 0)."""
    return sum(block.weight or 0 for block in view.canonical)


def _position(view: ChainView, block_id: str) -> int:
    try:
        return view.canonical_positions[block_id]
    except KeyError as e:
        raise BlockQueryError(
            f"Block {block_id} is not on the canonical branch of head {view.head}"
        ) from e


def distinct_sealers_since(view: ChainView, block_id: str) -> frozenset[SealerId]:
    """Sealers of ``block_id`` and of every canonical descendant."""
    position = _position(view, block_id)
    return frozenset(
        block.sealer for block in view.canonical[position:] if block.sealer is not None
    )


def required_sealers(rule: DecisionRule, n: int) -> int:
    """Distinct sealers needed by the majority and threshold rules."""
    if rule.kind is RuleKind.THRESHOLD:
        return rule.threshold or 0
    # |V| * 2 > n and |V| >= floor(n/2) + 1 coincide on integers.
    return n // 2 + 1


def _rounds_decided(view: ChainView, position: int, n: int) -> bool:
    branch = view.canonical
    anchor = branch[position].step or 0
    steps = [block.step or 0 for block in branch[position + 1 :]]
    first = bisect_right(steps, anchor + n) - bisect_right(steps, anchor)
    second = bisect_right(steps, anchor + 2 * n) - bisect_right(steps, anchor + n)
    return first * 2 > n and second * 2 > n


def is_decided(view: ChainView, block_id: str, rule: DecisionRule, n: int) -> bool:
    """
    Return whether a canonical block is decided under ``rule``.

    Genesis is always decided. AURA_ROUNDS needs more than n/2 canonical
    blocks in each of the two step windows of length n that follow the
    block; every other rule counts distinct sealers since the block.

    Raises:
        BlockQueryError: If ``block_id`` is not on the canonical branch.

    """
    position = _position(view, block_id)
    if position == 0:
        return True
    if rule.kind is RuleKind.AURA_ROUNDS:
        return _rounds_decided(view, position, n)
    return len(distinct_sealers_since(view, block_id)) >= required_sealers(rule, n)


def decided_height(view: ChainView, rule: DecisionRule, n: int) -> int:
    """Height of the deepest canonical block decided under ``rule``."""
    branch = view.canonical
    if rule.kind is RuleKind.AURA_ROUNDS:
        for position in range(len(branch) - 1, 0, -1):
            if _rounds_decided(view, position, n):
                return position
        return 0
    needed = required_sealers(rule, n)
    seen: set[SealerId] = set()
    # Distinct-sealer counts only grow walking toward genesis.
    for position in range(len(branch) - 1, 0, -1):
        sealer = branch[position].sealer
        if sealer is not None:
            seen.add(sealer)
        if len(seen) >= needed:
            return position
    return 0


def tx_height(view: ChainView, tx_id: str) -> int | None:
    """Height of the canonical block carrying ``tx_id``, if any."""
    return view.canonical_tx_index.get(tx_id)


def is_tx_decided(view: ChainView, tx_id: str, rule: DecisionRule, n: int) -> bool:
    """True when ``tx_id`` sits in a decided canonical block."""
    height = tx_height(view, tx_id)
    if height is None:
        return False
    return is_decided(view, view.canonical[height].id, rule, n)


def fork_rank(
    view: ChainView, protocol: Protocol, rule: DecisionRule, n: int
) -> tuple[int, ...]:
    """
    Key compared by the deliver rules: the higher rank is preferred.

    Under a final (THRESHOLD) rule the decided height is compared first, so
    a branch with a deeper decided block beats a merely longer one.
    """
    score = aura_score(view) if protocol is Protocol.AURA else clique_total_weight(view)
    if rule.is_final:
        return (decided_height(view, rule, n), score)
    return (score,)

"""Transaction validity against a canonical branch."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable

from poasim.chain.models import ChainView, Transaction


def contains_tx(view: ChainView, tx: Transaction) -> bool:
    """True when ``tx`` is on the canonical branch of ``view``."""
    return tx.tx_id in view.canonical_tx_index


def valid_extension(
    view: ChainView, pending: Iterable[Transaction]
) -> list[Transaction]:
    """
    Filter ``pending`` down to the transactions a new head block may carry.

    A transaction is kept when its nonce equals the number of the sender's
    transactions already on the branch (plus those kept before it). Already
    included, conflicting and out-of-sequence transactions are dropped.
    """
    spent = Counter(tx.sender for block in view.canonical for tx in block.txs)
    accepted: list[Transaction] = []
    for tx in pending:
        if tx.nonce != spent[tx.sender]:
            continue
        accepted.append(tx)
        spent[tx.sender] += 1
    return accepted


def conflicting_pair_on_branch(
    view: ChainView,
) -> tuple[Transaction, Transaction] | None:
    """Return a conflicting pair found on the canonical branch, if any."""
    seen: dict[tuple[str, int], Transaction] = {}
    for block in view.canonical:
        for tx in block.txs:
            key = (tx.sender, tx.nonce)
            other = seen.get(key)
            if other is not None and other.conflicts_with(tx):
                return other, tx
            seen.setdefault(key, tx)
    return None

"""Block and chain data model, fork choice and finality predicates."""

from poasim.chain.fork_choice import (
    aura_score,
    canonical_branch,
    clique_total_weight,
    decided_height,
    distinct_sealers_since,
    fork_rank,
    is_decided,
    is_tx_decided,
)
from poasim.chain.models import (
    Block,
    ChainView,
    DecisionRule,
    Protocol,
    RuleKind,
    SealerId,
    Transaction,
)

__all__ = [
    "Block",
    "ChainView",
    "DecisionRule",
    "Protocol",
    "RuleKind",
    "SealerId",
    "Transaction",
    "aura_score",
    "canonical_branch",
    "clique_total_weight",
    "decided_height",
    "distinct_sealers_since",
    "fork_rank",
    "is_decided",
    "is_tx_decided",
]

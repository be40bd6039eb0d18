"""
Double-spend verdict for a finished attack run.

A double spend needs three things at once: TX1 was decided in the victim
group before the heal, the attacker's branch is what everyone builds on
afterwards, and TX1 is gone from that final chain.
"""

from __future__ import annotations

from collections.abc import Iterable

from pydantic import BaseModel, Field

from poasim.attacks.plans import AttackPlan
from poasim.chain.fork_choice import fork_rank
from poasim.chain.models import ChainView, DecisionRule, Protocol
from poasim.errors import SimulationError
from poasim.net.trace import SimulationTrace
from poasim.tools.logger import get_logger

logger = get_logger(__name__)

RUN_CSV_COLUMNS = (
    "point_id",
    "run",
    "seed",
    "success",
    "victim_blocks",
    "attacker_blocks",
    "victim_weight_gain",
    "attacker_weight_gain",
    "tx1_committed",
    "tx1_final",
)


class RunOutcome(BaseModel):
    """Per-run record of an attack (or of a plain run without one)."""

    tx1_committed_in_partition: bool = Field(
        ..., description="TX1 decided in some victim-group view before the heal"
    )
    attacker_branch_adopted: bool = Field(
        ..., description="The attacker's first partition block is on the final chain"
    )
    tx1_in_final_chain: bool = Field(..., description="TX1 is on the final chain")
    double_spend: bool = Field(..., description="Conjunction of the three conditions")
    blocks_per_branch: tuple[int, int] = Field(
        (0, 0), description="(victim, attacker) blocks above the fork base at heal"
    )
    weight_gain_per_branch: tuple[int, int] = Field(
        (0, 0), description="(victim, attacker) Clique weight above the fork base"
    )
    final_head: str = Field(..., description="Head of the reference endpoint")
    tx1_commit_ms: int | None = Field(None, description="First time TX1 was decided")
    tx2_commit_ms: int | None = Field(None, description="First time TX2 was decided")
    tx2_in_final_chain: bool = Field(False, description="TX2 is on the final chain")
    partition_start_ms: int | None = Field(None, description="Partition opening time")
    partition_end_ms: int | None = Field(None, description="Heal time")
    fork_base: str | None = Field(
        None, description="Attacker head when the split began"
    )
    converged: bool = Field(True, description="All endpoints ended on one head")
    attacker_stall_ms: int | None = Field(
        None, description="When the attacker side stopped growing before the heal"
    )

    @property
    def victim_blocks(self) -> int:
        """Victim-branch blocks at heal."""
        return self.blocks_per_branch[0]

    @property
    def attacker_blocks(self) -> int:
        """Attacker-branch blocks at heal."""
        return self.blocks_per_branch[1]

    def to_row(self, point_id: str, run: int, seed: int) -> dict[str, object]:
        """The per-run CSV row."""
        return {
            "point_id": point_id,
            "run": run,
            "seed": seed,
            "success": int(self.double_spend),
            "victim_blocks": self.blocks_per_branch[0],
            "attacker_blocks": self.blocks_per_branch[1],
            "victim_weight_gain": self.weight_gain_per_branch[0],
            "attacker_weight_gain": self.weight_gain_per_branch[1],
            "tx1_committed": int(self.tx1_committed_in_partition),
            "tx1_final": int(self.tx1_in_final_chain),
        }


def best_view(
    views: Iterable[ChainView], protocol: Protocol, rule: DecisionRule, n: int
) -> ChainView | None:
    """The highest-ranked view; the first one wins ties."""
    best: ChainView | None = None
    for view in views:
        if best is None or fork_rank(view, protocol, rule, n) > fork_rank(
            best, protocol, rule, n
        ):
            best = view
    return best


def branch_gain(view: ChainView, base_height: int) -> tuple[int, int]:
    """Blocks and Clique weight on the canonical branch above ``base_height``."""
    above = view.canonical[base_height + 1 :]
    return len(above), sum(block.weight or 0 for block in above)


def evaluate_double_spend(
    trace: SimulationTrace, plan: AttackPlan, rule: DecisionRule
) -> RunOutcome:
    """
    Score one attack run.

    Branch sizes are read from the best victim-group and attacker-group
    views at the heal, counted above the fork base.

    Raises:
        SimulationError: If the run never opened its partition.

    """
    if trace.partition_start_ms is None or trace.fork_base is None:
        raise SimulationError("The attack partition never opened")
    n = plan.n
    protocol = plan.protocol
    heal = trace.heal_views
    victim = best_view(
        (heal[e] for e in sorted(plan.victim_group) if e in heal), protocol, rule, n
    )
    attacker = best_view(
        (heal[e] for e in sorted(plan.attacker_group) if e in heal), protocol, rule, n
    )
    if victim is None or attacker is None:
        raise SimulationError("Missing heal-time views for one of the groups")
    base_height = attacker.blocks[trace.fork_base].height
    victim_blocks, victim_gain = branch_gain(victim, base_height)
    attacker_blocks, attacker_gain = branch_gain(attacker, base_height)

    final = trace.reference_view
    tx1, tx2 = plan.txs.tx1.tx_id, plan.txs.tx2.tx_id
    tx1_commit = trace.commit_ms.get(tx1)
    committed = (
        tx1_commit is not None
        and trace.partition_end_ms is not None
        and tx1_commit < trace.partition_end_ms
    )
    adopted = (
        trace.attacker_first_block is not None
        and trace.attacker_first_block in final.canonical_positions
    )
    tx1_final = tx1 in final.canonical_tx_index
    if not trace.converged:
        logger.warning(f"Run with seed {trace.seed} ended without converging")
    return RunOutcome(
        tx1_committed_in_partition=committed,
        attacker_branch_adopted=adopted,
        tx1_in_final_chain=tx1_final,
        double_spend=committed and adopted and not tx1_final,
        blocks_per_branch=(victim_blocks, attacker_blocks),
        weight_gain_per_branch=(
            (victim_gain, attacker_gain) if protocol is Protocol.CLIQUE else (0, 0)
        ),
        final_head=final.head,
        tx1_commit_ms=tx1_commit,
        tx2_commit_ms=trace.commit_ms.get(tx2),
        tx2_in_final_chain=tx2 in final.canonical_tx_index,
        partition_start_ms=trace.partition_start_ms,
        partition_end_ms=trace.partition_end_ms,
        fork_base=trace.fork_base,
        converged=trace.converged,
        attacker_stall_ms=trace.attacker_stall_ms,
    )


def baseline_outcome(trace: SimulationTrace, tracked_tx: str | None) -> RunOutcome:
    """Outcome of a run without an attack; ``tracked_tx`` plays TX1."""
    final = trace.reference_view
    commit = trace.commit_ms.get(tracked_tx) if tracked_tx else None
    return RunOutcome(
        tx1_committed_in_partition=commit is not None,
        attacker_branch_adopted=False,
        tx1_in_final_chain=bool(tracked_tx) and tracked_tx in final.canonical_tx_index,
        double_spend=False,
        final_head=final.head,
        tx1_commit_ms=commit,
        converged=trace.converged,
    )

"""
Cloning-attack planning.

A plan fixes who attacks, which honest sealers end up on which side of the
partition, when the partition opens and for how long at most, and the two
conflicting transactions. Endpoints are numbered sealers first (endpoint i
runs sealer i), then one clone endpoint per attacker (``n + j``).

Functions:
    plan_aura_attack: Static window opening at an attacker turn.
    plan_clique_attack: Order-aware split with k consecutive in-order sealers.
    plan_clique_blind_attack: Random split, heal once the attacker side is
        guaranteed to outweigh the victim side.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from poasim.chain.models import Protocol, SealerId, Transaction
from poasim.errors import PlanError
from poasim.net.network import CloneBinding
from poasim.sim_config import DEFAULT_ATTACK, DEFAULT_CLIQUE

# Attacker-group offsets from the attacker index for n = 9, by the number of
# consecutive upcoming in-order sealers placed on the attacker side.
CANONICAL_CLIQUE_DIVISIONS: dict[int, tuple[int, ...]] = {
    5: (0, 1, 2, 3, 4),
    4: (0, 1, 2, 3, 5),
    3: (0, 1, 2, 5, 6),
    2: (0, 1, 3, 5, 7),
}


class StartRule(str, Enum):
    """When the partition opens."""

    # Aura: start of the first attacker step at or after the warm-up.
    ATTACKER_TURN = "attacker_turn"
    # Clique: as soon as the attacker's head is the block before its own.
    BEFORE_ATTACKER_BLOCK = "before_attacker_block"


class HealRule(str, Enum):
    """When the attacker ends the partition before the maximum duration."""

    OVERTAKE = "overtake"
    BLIND_GAIN = "blind_gain"
    FIXED = "fixed"


@dataclass(frozen=True)
class PartitionTiming:
    """Opening rule and maximum length of the attack window."""

    start_rule: StartRule
    duration_ms: int
    start_ms: int | None = None
    min_trigger_number: int = 0
    heal_rule: HealRule = HealRule.OVERTAKE

    def __post_init__(self) -> None:
        """Reject empty windows and static rules without a start."""
        if self.duration_ms <= 0:
            raise PlanError(
                f"Partition duration must be positive, got {self.duration_ms}"
            )
        if self.start_rule is StartRule.ATTACKER_TURN and self.start_ms is None:
            raise PlanError("An attacker-turn partition needs a start time")


@dataclass(frozen=True)
class ConflictingTxPair:
    """TX1 goes to the victim group, TX2 to the attacker group."""

    tx1: Transaction
    tx2: Transaction

    def __post_init__(self) -> None:
        """Both transactions must spend the same sender nonce differently."""
        if not self.tx1.conflicts_with(self.tx2):
            raise PlanError(f"{self.tx1.tx_id} and {self.tx2.tx_id} do not conflict")

    @classmethod
    def default(cls) -> ConflictingTxPair:
        """The sender's whole balance paid to the merchant, then back to itself."""
        sender = DEFAULT_ATTACK["sender"]
        amount = DEFAULT_ATTACK["amount"]
        return cls(
            tx1=Transaction(sender, DEFAULT_ATTACK["victim_recipient"], amount, 0),
            tx2=Transaction(sender, DEFAULT_ATTACK["attacker_recipient"], amount, 0),
        )


@dataclass(frozen=True)
class AttackPlan:
    """
    Everything one attack run needs.

    ``attacker_side`` and ``victim_side`` hold honest sealer indices. The
    attacker's original endpoints sit with ``attacker_side``; the clones
    join ``victim_side``.
    """

    protocol: Protocol
    n: int
    attackers: tuple[SealerId, ...]
    attacker_side: frozenset[int]
    victim_side: frozenset[int]
    partition: PartitionTiming
    txs: ConflictingTxPair
    clique_division: int | None = None
    blind: bool = False

    def __post_init__(self) -> None:
        """Check the split and the per-group identity counts."""
        indices = [a.index for a in self.attackers]
        if not 1 <= len(indices) <= 2 or len(set(indices)) != len(indices):
            raise PlanError(f"Expected one or two distinct attackers, got {indices}")
        if any(not 0 <= i < self.n for i in indices):
            raise PlanError(f"Attackers {indices} outside [0, {self.n})")
        honest = set(range(self.n)) - set(indices)
        if self.attacker_side & self.victim_side:
            raise PlanError("A sealer cannot sit on both sides of the partition")
        if self.attacker_side | self.victim_side != honest:
            raise PlanError(
                f"Sides {sorted(self.attacker_side)} / {sorted(self.victim_side)} "
                f"must split the honest sealers {sorted(honest)}"
            )
        needed = self.n // 2 + 1
        sides = (("attacker", self.attacker_side), ("victim", self.victim_side))
        for label, side in sides:
            if len(side) + len(indices) < needed:
                raise PlanError(
                    f"The {label} group holds {len(side) + len(indices)} identities, "
                    f"fewer than the majority {needed}"
                )

    @property
    def attacker(self) -> SealerId:
        """The first (or only) attacker."""
        return self.attackers[0]

    @property
    def t(self) -> int:
        """Number of cloned identities."""
        return len(self.attackers)

    def clone_endpoint(self, position: int) -> int:
        """Endpoint id of the clone of ``attackers[position]``."""
        return self.n + position

    def clone_bindings(self) -> list[CloneBinding]:
        """Fresh bindings for one run."""
        return [
            CloneBinding(
                sealer=attacker,
                endpoints=(attacker.index, self.clone_endpoint(j)),
            )
            for j, attacker in enumerate(self.attackers)
        ]

    @property
    def attacker_group(self) -> frozenset[int]:
        """Endpoints on the attacker side: the originals plus honest members."""
        return frozenset(a.index for a in self.attackers) | self.attacker_side

    @property
    def victim_group(self) -> frozenset[int]:
        """Endpoints on the victim side: the clones plus honest members."""
        clones = {self.clone_endpoint(j) for j in range(self.t)}
        return frozenset(clones) | self.victim_side

    @property
    def attacker_side_seal_limit(self) -> int | None:
        """Blocks an original attacker endpoint may seal during the window."""
        if self.protocol is Protocol.CLIQUE and not self.blind:
            return 1
        return None


def _balanced_split(
    honest: Sequence[int], attacker_count: int, placement_seed: int
) -> frozenset[int]:
    rng = np.random.default_rng(placement_seed)
    shuffled = rng.permutation(np.asarray(honest, dtype=np.int64))
    return frozenset(int(i) for i in shuffled[:attacker_count])


def plan_aura_attack(
    n: int,
    step_duration_ms: int,
    partition_steps: int,
    placement_seed: int,
    clones: int = 1,
    attacker: int = DEFAULT_ATTACK["attacker"],
    attackers: Sequence[int] | None = None,
    attacker_side: Sequence[int] | None = None,
    txs: ConflictingTxPair | None = None,
    early_heal: bool = True,
) -> AttackPlan:
    """
    Plan a Cloning Attack on Aura.

    The honest sealers are split at random but balanced (an odd one out
    joins the attacker side) unless ``attacker_side`` pins the split. The
    partition opens at the first attacker step at or after step ``2n`` and
    lasts at most ``partition_steps`` steps.

    Raises:
        PlanError: For even n with a single attacker, non-positive
            ``partition_steps`` or an inconsistent explicit split.

    """
    if partition_steps < 1:
        raise PlanError(f"partition_steps must be at least 1, got {partition_steps}")
    if attackers is None:
        indices = [attacker % n]
        if clones == 2:
            indices.append((attacker + n // 2) % n)
        elif clones != 1:
            raise PlanError(f"Only one or two clone pairs are supported, got {clones}")
    else:
        indices = list(attackers)
    if n % 2 == 0 and len(indices) < 2:
        raise PlanError(
            f"n={n} is even: the attack needs two attackers (two clone pairs) so "
            "both groups reach a majority"
        )
    honest = sorted(set(range(n)) - set(indices))
    attacker_count = (len(honest) + 1) // 2
    if attacker_side is None:
        side = _balanced_split(honest, attacker_count, placement_seed)
    else:
        side = frozenset(attacker_side)
        if len(side) != attacker_count or not side <= set(honest):
            raise PlanError(
                f"attacker_side must hold {attacker_count} honest sealers, "
                f"got {sorted(side)}"
            )
    warmup = DEFAULT_ATTACK["warmup_rotations"] * n
    start_step = next(k for k in range(warmup, warmup + n) if k % n in set(indices))
    return AttackPlan(
        protocol=Protocol.AURA,
        n=n,
        attackers=tuple(SealerId(i) for i in indices),
        attacker_side=side,
        victim_side=frozenset(honest) - side,
        partition=PartitionTiming(
            start_rule=StartRule.ATTACKER_TURN,
            duration_ms=partition_steps * step_duration_ms,
            start_ms=start_step * step_duration_ms,
            heal_rule=HealRule.OVERTAKE if early_heal else HealRule.FIXED,
        ),
        txs=txs or ConflictingTxPair.default(),
    )


def clique_division_offsets(
    n: int, consecutive_k: int, placement_seed: int
) -> tuple[int, ...]:
    """
    Attacker-group offsets from the attacker index.

    Offsets ``0..k-1`` are the attacker and the next k-1 in-order sealers;
    offset k is kept victim-side so the run of consecutive sealers stops at
    k. For n = 9 the canonical divisions are used, otherwise the remaining
    members are drawn from the offsets above k.
    """
    if n == 9:
        return CANONICAL_CLIQUE_DIVISIONS[consecutive_k]
    rng = np.random.default_rng(placement_seed)
    extra = (n // 2 + 1) - consecutive_k
    pool = np.arange(consecutive_k + 1, n, dtype=np.int64)
    drawn = sorted(int(o) for o in rng.choice(pool, size=extra, replace=False))
    return tuple(range(consecutive_k)) + tuple(drawn)


def _check_clique_n(n: int) -> None:
    if n < 3 or n % 2 == 0:
        raise PlanError(
            f"Clique plans need an odd n >= 3 (one clone pair), got n={n}"
        )


def plan_clique_attack(
    n: int,
    consecutive_k: int,
    placement_seed: int,
    duration_ms: int = 28_000,
    attacker: int = DEFAULT_ATTACK["attacker"],
    txs: ConflictingTxPair | None = None,
    early_heal: bool = True,
) -> AttackPlan:
    """
    Plan an order-aware Cloning Attack on Clique.

    The partition opens right after the block that precedes the attacker's
    in-order number; each clone seals that block on its own side and then
    stays idle.

    Raises:
        PlanError: If n is even or k lies outside ``[2, n//2 + 1]``.

    """
    _check_clique_n(n)
    majority = n // 2 + 1
    if not 2 <= consecutive_k <= majority:
        raise PlanError(
            f"consecutive_k must lie in [2, {majority}] for n={n}, got {consecutive_k}"
        )
    attacker %= n
    offsets = clique_division_offsets(n, consecutive_k, placement_seed)
    side = frozenset((attacker + o) % n for o in offsets if o != 0)
    honest = frozenset(range(n)) - {attacker}
    return AttackPlan(
        protocol=Protocol.CLIQUE,
        n=n,
        attackers=(SealerId(attacker),),
        attacker_side=side,
        victim_side=honest - side,
        partition=PartitionTiming(
            start_rule=StartRule.BEFORE_ATTACKER_BLOCK,
            duration_ms=duration_ms,
            min_trigger_number=DEFAULT_ATTACK["warmup_rotations"] * n,
            heal_rule=HealRule.OVERTAKE if early_heal else HealRule.FIXED,
        ),
        txs=txs or ConflictingTxPair.default(),
        clique_division=consecutive_k,
    )


def plan_clique_blind_attack(
    n: int,
    placement_seed: int = 0,
    block_period_ms: int = DEFAULT_CLIQUE["block_period_ms"],
    duration_ms: int | None = None,
    attacker: int = DEFAULT_ATTACK["attacker"],
    txs: ConflictingTxPair | None = None,
) -> AttackPlan:
    """
    Plan a Cloning Attack on Clique that ignores the sealer order.

    The victim-side clone seals once, which caps the victim gain at
    ``2 * sealer_limit``; the attacker-side original keeps sealing and the
    partition holds until the attacker side gained ``2 * sealer_limit + 1``
    and TX1 is decided. ``duration_ms`` is only a safety bound, by default
    four rotations.

    Raises:
        PlanError: If n is even.

    """
    _check_clique_n(n)
    attacker %= n
    honest = sorted(set(range(n)) - {attacker})
    side = _balanced_split(honest, len(honest) // 2, placement_seed)
    return AttackPlan(
        protocol=Protocol.CLIQUE,
        n=n,
        attackers=(SealerId(attacker),),
        attacker_side=side,
        victim_side=frozenset(honest) - side,
        partition=PartitionTiming(
            start_rule=StartRule.BEFORE_ATTACKER_BLOCK,
            duration_ms=duration_ms or 4 * n * block_period_ms,
            min_trigger_number=DEFAULT_ATTACK["warmup_rotations"] * n,
            heal_rule=HealRule.BLIND_GAIN,
        ),
        txs=txs or ConflictingTxPair.default(),
        blind=True,
    )

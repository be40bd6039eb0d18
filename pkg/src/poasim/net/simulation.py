"""
Deterministic discrete-event driver for one simulated run.

Every sealer endpoint runs the Aura or Clique state machine, views travel
as whole-chain broadcasts over the ``Network`` and the attack controller
opens and heals the partition, activates clones and injects the
conflicting transactions. All randomness comes from one seeded generator.

Functions:
    simulate: Run a ``SimulationSetup`` and return the ``SimulationTrace``.
    setup_from_scenario: Build the setup (and attack plan) for a scenario.
    run_simulation: Scenario plus seed to a scored ``RunOutcome``.
    score_trace: Verdict of a finished trace.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from poasim.analysis.region import min_clique_blind_gain
from poasim.attacks.plans import (
    AttackPlan,
    HealRule,
    StartRule,
    plan_aura_attack,
    plan_clique_attack,
    plan_clique_blind_attack,
)
from poasim.attacks.verdict import (
    RunOutcome,
    baseline_outcome,
    best_view,
    branch_gain,
    evaluate_double_spend,
)
from poasim.chain.fork_choice import fork_rank, is_tx_decided
from poasim.chain.models import ChainView, DecisionRule, Protocol, SealerId, Transaction
from poasim.engines.aura import (
    AuraConfig,
    AuraSealerState,
    current_step,
    next_turn_ms,
    on_deliver_aura,
    propose_aura,
    validate_aura_view,
)
from poasim.engines.clique import (
    IN_ORDER_WEIGHT,
    CliqueConfig,
    CliqueSealerState,
    fire_seal,
    on_deliver_clique,
    schedule_seal,
    signed_recently,
    validate_clique_view,
)
from poasim.errors import (
    ChainStructureError,
    ConfigError,
    InvalidBlockError,
    SimulationError,
)
from poasim.net.events import RANK_LATE_TIMER, RANK_TIMER, Event, EventKind, EventQueue
from poasim.net.network import (
    CloneBinding,
    DelayModel,
    Network,
    NodeEndpoint,
    PartitionSchedule,
    PartitionWindow,
)
from poasim.net.trace import SimulationTrace, TraceLog
from poasim.sim_config import (
    DEFAULT_ATTACK,
    DEFAULT_AURA,
    DEFAULT_CLIQUE,
    DEFAULT_NETWORK,
)
from poasim.tools.logger import get_logger
from poasim.utils.config_loader import ScenarioConfig

logger = get_logger(__name__)

SealerState = AuraSealerState | CliqueSealerState


@dataclass(frozen=True)
class TxInjection:
    """Hand ``tx`` to ``endpoints`` (every active endpoint when None) at ``at_ms``."""

    at_ms: int
    tx: Transaction
    endpoints: frozenset[int] | None = None


@dataclass(frozen=True)
class SimulationSetup:
    """Runtime description of one run, independent of any file format."""

    protocol: Protocol
    n: int
    step_duration_ms: int = DEFAULT_AURA["step_duration_ms"]
    block_period_ms: int = DEFAULT_CLIQUE["block_period_ms"]
    wiggle_unit_ms: int = DEFAULT_CLIQUE["wiggle_unit_ms"]
    decision_rule: DecisionRule | None = None
    delay: DelayModel = field(default_factory=DelayModel)
    poll_ms: int = DEFAULT_NETWORK["poll_ms"]
    silent: frozenset[int] = frozenset()
    observers: int = 0
    plan: AttackPlan | None = None
    partitions: tuple[PartitionWindow, ...] = ()
    injections: tuple[TxInjection, ...] = ()
    end_ms: int | None = None
    settle_rounds: int = DEFAULT_ATTACK["settle_rounds"]
    scripted_delays: Mapping[tuple[int, int], int] = field(default_factory=dict)
    record_trace: bool = False

    def __post_init__(self) -> None:
        """Cross-check the pieces before any event fires."""
        problems: list[str] = []
        if self.n < 1:
            problems.append(f"n must be at least 1, got {self.n}")
        if self.poll_ms <= 0:
            problems.append(f"poll_ms must be positive, got {self.poll_ms}")
        if any(not 0 <= i < self.n for i in self.silent):
            problems.append(
                f"silent sealers {sorted(self.silent)} outside [0, {self.n})"
            )
        if self.observers < 0:
            problems.append(f"observers must be non-negative, got {self.observers}")
        if self.plan is not None:
            if self.plan.n != self.n or self.plan.protocol is not self.protocol:
                problems.append("the attack plan was built for another network")
            if self.partitions:
                problems.append("static partitions cannot be combined with an attack")
        elif self.end_ms is None or self.end_ms <= 0:
            problems.append("runs without an attack need a positive end_ms")
        if problems:
            raise ConfigError("Invalid simulation setup", problems)

    @property
    def rule(self) -> DecisionRule:
        """The decision rule in force."""
        return self.decision_rule or DecisionRule.for_protocol(self.protocol)

    @property
    def slot_ms(self) -> int:
        """Step duration (Aura) or block period (Clique)."""
        if self.protocol is Protocol.AURA:
            return self.step_duration_ms
        return self.block_period_ms


@dataclass
class NodeRuntime:
    """Driver-side bookkeeping for one endpoint."""

    endpoint: NodeEndpoint
    state: SealerState | None
    observer_view: ChainView | None = None
    mempool: list[Transaction] = field(default_factory=list)
    seal_limit: int | None = None
    sealed: int = 0
    timer_token: int = 0

    @property
    def view(self) -> ChainView:
        """Current local view."""
        if self.state is not None:
            return self.state.view
        if self.observer_view is None:
            raise SimulationError(f"Endpoint {self.endpoint.endpoint_id} has no view")
        return self.observer_view

    @property
    def can_seal(self) -> bool:
        """Whether the endpoint still seals."""
        return self.state is not None and (
            self.seal_limit is None or self.sealed < self.seal_limit
        )


@dataclass
class _Tracked:
    tx_id: str
    endpoints: frozenset[int] | None
    open: bool = True


class Simulation:
    """One run: event loop, node runtimes and the attack controller."""

    def __init__(self, setup: SimulationSetup, seed: int) -> None:
        """Wire endpoints, network and initial events; nothing fires yet."""
        self.setup = setup
        self.seed = seed
        self.protocol = setup.protocol
        self.n = setup.n
        self.rule = setup.rule
        self.plan = setup.plan
        self.rng = np.random.default_rng(seed)
        self.queue = EventQueue()
        self.log = TraceLog() if setup.record_trace else None
        self.clock = 0

        if self.protocol is Protocol.AURA:
            self.aura_config: AuraConfig | None = AuraConfig(
                n=self.n,
                step_duration_ms=setup.step_duration_ms,
                decision_rule=self.rule,
            )
            self.clique_config: CliqueConfig | None = None
        else:
            self.aura_config = None
            self.clique_config = CliqueConfig(
                n=self.n,
                block_period_ms=setup.block_period_ms,
                wiggle_unit_ms=setup.wiggle_unit_ms,
                decision_rule=self.rule,
                scripted_delays=dict(setup.scripted_delays),
            )

        t = self.plan.t if self.plan else 0
        endpoints = [NodeEndpoint(i, SealerId(i)) for i in range(self.n)]
        self.bindings: list[CloneBinding] = (
            self.plan.clone_bindings() if self.plan else []
        )
        endpoints += [NodeEndpoint(b.clone, b.sealer) for b in self.bindings]
        first_observer = self.n + t
        endpoints += [
            NodeEndpoint(first_observer + i) for i in range(setup.observers)
        ]
        self.network = Network(
            endpoints,
            self.queue,
            self.rng,
            delay=setup.delay,
            schedule=PartitionSchedule(list(setup.partitions)),
        )

        genesis = ChainView.from_genesis(self.protocol)
        self.nodes: dict[int, NodeRuntime] = {}
        for endpoint in endpoints:
            if endpoint.sealer is None:
                self.nodes[endpoint.endpoint_id] = NodeRuntime(
                    endpoint, state=None, observer_view=genesis
                )
                continue
            node = NodeRuntime(
                endpoint, state=self._new_state(endpoint.sealer, genesis)
            )
            if endpoint.sealer.index in setup.silent:
                node.seal_limit = 0
            self.nodes[endpoint.endpoint_id] = node
        # Clones stay offline until the attack starts
        for binding in self.bindings:
            self.network.deactivate(binding.clone)

        self._dirty: set[int] = set()
        self._tracked: list[_Tracked] = []
        self.commit_ms: dict[str, int] = {}

        self._attack_groups: tuple[frozenset[int], frozenset[int]] | None = None
        self._window: PartitionWindow | None = None
        self._started = False
        self._healed = False
        self._heal_scheduled = False
        self.partition_start_ms: int | None = None
        self.partition_end_ms: int | None = None
        self.fork_base: str | None = None
        self.attacker_first_block: str | None = None
        self.heal_views: dict[int, ChainView] = {}
        # Best attacker-side height and when it last grew.
        self._attacker_progress: tuple[int, int] | None = None
        self.attacker_stall_ms: int | None = None

        if self.plan is not None:
            observers = frozenset(
                range(first_observer, first_observer + setup.observers)
            )
            self._attack_groups = (
                self.plan.attacker_group,
                self.plan.victim_group | observers,
            )
            PartitionSchedule(
                [PartitionWindow(0, 1, self._attack_groups)]
            ).validate(self.network.endpoints)
            self.end_ms = self._attack_deadline()
        else:
            self.end_ms = setup.end_ms or 0

    # -- setup helpers -------------------------------------------------

    def _new_state(self, sealer: SealerId, view: ChainView) -> SealerState:
        if self.aura_config is not None:
            return AuraSealerState(id=sealer, view=view, config=self.aura_config)
        if self.clique_config is None:
            raise SimulationError("No engine configuration")
        return CliqueSealerState(id=sealer, view=view, config=self.clique_config)

    def _attack_deadline(self) -> int:
        plan = self.plan
        if plan is None:
            raise SimulationError("No attack plan")
        settle = self.setup.settle_rounds * self.setup.slot_ms
        timing = plan.partition
        if timing.start_ms is not None:
            return timing.start_ms + timing.duration_ms + settle
        # Trigger must fire within a couple of rotations after the warm-up.
        warmup = timing.min_trigger_number + 2 * self.n + 1
        return warmup * self.setup.slot_ms + timing.duration_ms + settle

    def _ceil_grid(self, clock_ms: int) -> int:
        poll = self.setup.poll_ms
        return -(-clock_ms // poll) * poll

    def _draw(self, low: int, high: int) -> int:
        return int(self.rng.integers(low, high + 1))

    # -- timers --------------------------------------------------------

    def _schedule_timer(self, node: NodeRuntime) -> None:
        node.timer_token += 1
        if not node.can_seal or node.endpoint.endpoint_id not in self.network.active:
            return
        state = node.state
        if isinstance(state, AuraSealerState):
            fire = next_turn_ms(state, self.clock)
            self.queue.push(
                self._ceil_grid(fire),
                EventKind.TIMER,
                endpoint=node.endpoint.endpoint_id,
                token=node.timer_token,
            )
        elif isinstance(state, CliqueSealerState):
            pending = schedule_seal(state, self.clock, self._draw)
            if pending is None:
                return
            rank = RANK_TIMER if pending.weight == IN_ORDER_WEIGHT else RANK_LATE_TIMER
            self.queue.push(
                self._ceil_grid(pending.fire_ms),
                EventKind.TIMER,
                rank=rank,
                endpoint=node.endpoint.endpoint_id,
                token=node.timer_token,
            )

    # -- event handlers ------------------------------------------------

    def _on_timer(self, event: Event) -> str:
        if event.endpoint is None:
            raise SimulationError(f"TIMER event {event.sequence} has no endpoint")
        node = self.nodes[event.endpoint]
        if (
            event.token != node.timer_token
            or not node.can_seal
            or node.endpoint.endpoint_id not in self.network.active
        ):
            return "stale"
        state = node.state
        if isinstance(state, AuraSealerState):
            block = propose_aura(state, self.clock, node.mempool)
            # Move on to the next own step whatever happened in this one.
            node.timer_token += 1
            step = current_step(self.clock, state.config)
            resume = (step + 1) * state.config.step_duration_ms
            if block is not None:
                self._on_sealed(node, block.id)
            if node.can_seal:
                fire = next_turn_ms(state, max(resume, self.clock))
                self.queue.push(
                    self._ceil_grid(fire),
                    EventKind.TIMER,
                    endpoint=node.endpoint.endpoint_id,
                    token=node.timer_token,
                )
            if block is None:
                return f"idle step={step}"
            return f"sealed {block.id} step={block.step} txs={len(block.txs)}"
        if isinstance(state, CliqueSealerState):
            block = fire_seal(state, self.clock, node.mempool)
            if block is None:
                self._schedule_timer(node)
                return "cancelled"
            self._on_sealed(node, block.id)
            self._schedule_timer(node)
            return (
                f"sealed {block.id} number={block.number} weight={block.weight} "
                f"txs={len(block.txs)}"
            )
        return "stale"

    def _on_sealed(self, node: NodeRuntime, block_id: str) -> None:
        endpoint = node.endpoint.endpoint_id
        node.sealed += 1
        self._dirty.add(endpoint)
        if (
            self._started
            and not self._healed
            and self.plan is not None
            and self.attacker_first_block is None
            and endpoint in {a.index for a in self.plan.attackers}
        ):
            self.attacker_first_block = block_id
        self.network.broadcast(endpoint, node.view, self.clock)

    def _deliver(self, node: NodeRuntime, incoming: ChainView) -> bool:
        state = node.state
        if isinstance(state, AuraSealerState):
            return on_deliver_aura(state, incoming)
        if isinstance(state, CliqueSealerState):
            adopted = on_deliver_clique(state, incoming)
            if adopted:
                self._schedule_timer(node)
            return adopted
        local = node.view
        if incoming.head == local.head:
            return False
        try:
            if self.aura_config is not None:
                validate_aura_view(incoming, local, self.n)
            elif self.clique_config is not None:
                validate_clique_view(incoming, local, self.clique_config)
        except (ChainStructureError, InvalidBlockError) as e:
            logger.debug(f"Observer {node.endpoint.endpoint_id} rejected a view: {e}")
            return False
        if fork_rank(incoming, self.protocol, self.rule, self.n) > fork_rank(
            local, self.protocol, self.rule, self.n
        ):
            node.observer_view = incoming
            return True
        return False

    def _on_deliver(self, event: Event) -> str:
        if event.view is None or event.endpoint is None:
            raise SimulationError(f"DELIVER event {event.sequence} carries no view")
        if not self.network.deliverable(event):
            return f"from={event.sender} dropped"
        node = self.nodes[event.endpoint]
        adopted = self._deliver(node, event.view)
        if adopted:
            self._dirty.add(event.endpoint)
        verdict = "adopted" if adopted else "kept"
        return f"from={event.sender} head={event.view.head} {verdict}"

    def _on_inject(self, event: Event) -> str:
        if event.tx is None:
            raise SimulationError(f"INJECT_TX event {event.sequence} carries no tx")
        targets = event.payload
        reached = []
        for endpoint in sorted(self.network.active):
            if targets is not None and endpoint not in targets:
                continue
            node = self.nodes[endpoint]
            if event.tx not in node.mempool:
                node.mempool.append(event.tx)
            reached.append(str(endpoint))
        return f"{event.tx.tx_id} to={','.join(reached) or '-'}"

    def _on_edge(self, event: Event) -> str:
        action = event.payload
        if action == "attack-start":
            return self._start_attack()
        if action == "heal":
            return self._heal()
        window = self.network.schedule.window_at(self.clock)
        if action == "window-end":
            for endpoint in sorted(self.network.active):
                self.network.broadcast(endpoint, self.nodes[endpoint].view, self.clock)
            return "window end"
        groups = window.groups if window is not None else ()
        return "window start " + " | ".join(
            ",".join(str(e) for e in sorted(group)) for group in groups
        )

    # -- attack controller ---------------------------------------------

    def activate_clone(self, binding: CloneBinding, clock_ms: int) -> None:
        """Copy the original's view into the clone and put it on the network."""
        self.network.activate_clone(binding, clock_ms)
        original = self.nodes[binding.original]
        clone = self.nodes[binding.clone]
        if original.state is None or clone.state is None:
            raise SimulationError(
                f"Clone binding {binding.endpoints} lacks sealer state"
            )
        clone.state = self._new_state(binding.sealer, original.view)
        if isinstance(original.state, AuraSealerState) and isinstance(
            clone.state, AuraSealerState
        ):
            clone.state.last_sealed_step = original.state.last_sealed_step
        clone.mempool = list(original.mempool)
        # The victim-side clone seals exactly once.
        clone.seal_limit = 1
        clone.sealed = 0
        self._dirty.add(binding.clone)

    def _open_attack_window(self, start_ms: int) -> None:
        plan = self.plan
        if plan is None or self._attack_groups is None:
            raise SimulationError("No attack plan")
        self._window = self.network.schedule.open(
            start_ms, start_ms + plan.partition.duration_ms, self._attack_groups
        )
        self.queue.push(start_ms, EventKind.PARTITION_EDGE, payload="attack-start")
        self.queue.push(self._window.end_ms, EventKind.PARTITION_EDGE, payload="heal")
        settle = self.setup.settle_rounds * self.setup.slot_ms
        self.end_ms = self._window.end_ms + settle

    def _start_attack(self) -> str:
        plan = self.plan
        if plan is None or self._attack_groups is None:
            raise SimulationError("No attack plan")
        self._started = True
        self.partition_start_ms = self.clock
        attacker_node = self.nodes[plan.attacker.index]
        self.fork_base = attacker_node.view.head
        self._attacker_progress = (attacker_node.view.height, self.clock)
        for binding in self.bindings:
            self.activate_clone(binding, self.clock)
        for attacker in plan.attackers:
            node = self.nodes[attacker.index]
            limit = plan.attacker_side_seal_limit
            node.seal_limit = None if limit is None else node.sealed + limit
        attacker_group, victim_group = self._attack_groups
        self.queue.push(
            self.clock, EventKind.INJECT_TX, tx=plan.txs.tx1, payload=victim_group
        )
        self.queue.push(
            self.clock, EventKind.INJECT_TX, tx=plan.txs.tx2, payload=attacker_group
        )
        self._tracked.append(_Tracked(plan.txs.tx1.tx_id, victim_group))
        self._tracked.append(_Tracked(plan.txs.tx2.tx_id, attacker_group))
        for binding in self.bindings:
            self._schedule_timer(self.nodes[binding.clone])
        logger.debug(f"Attack started at {self.clock} ms on top of {self.fork_base}")
        return "attack start " + " | ".join(
            ",".join(str(e) for e in sorted(group)) for group in self._attack_groups
        )

    def _heal(self) -> str:
        plan = self.plan
        if plan is None or self._healed or self._window is None:
            return "stale"
        self._watch_attacker_progress()
        self._healed = True
        # Close the window early if the heal came before its end
        if self.clock < self._window.end_ms:
            self._window = self.network.schedule.close(self._window, self.clock)
        self.partition_end_ms = self.clock
        # Snapshot the views each side held at the heal
        self.heal_views = {e: self.nodes[e].view for e in sorted(self.network.active)}
        for tracked in self._tracked:
            tracked.open = False
        # Retire the clones and freeze each attacker at its sealed count
        for binding in self.bindings:
            self.network.deactivate(binding.clone)
            self.nodes[binding.clone].timer_token += 1
        for attacker in plan.attackers:
            node = self.nodes[attacker.index]
            node.seal_limit = node.sealed
            node.timer_token += 1
        # Everyone exchanges views, then the run settles
        for endpoint in sorted(self.network.active):
            self.network.broadcast(endpoint, self.nodes[endpoint].view, self.clock)
        self.end_ms = self.clock + self.setup.settle_rounds * self.setup.slot_ms
        return "heal"

    def _watch_attacker_progress(self) -> None:
        """
        Flag an attacker side that stopped growing during the partition.

        Two out-of-order seals of the same number can leave the attacker
        group on equal-weight branches whose only eligible next sealers sit
        on the other branch. Neither branch grows again until the heal.
        """
        if (
            self.clique_config is None
            or self._attack_groups is None
            or self._attacker_progress is None
            or self._healed
            or self.attacker_stall_ms is not None
        ):
            return
        attacker_group = self._attack_groups[0]
        height = max(
            self.nodes[e].view.height
            for e in attacker_group
            if e in self.network.active
        )
        best, since = self._attacker_progress
        if height > best:
            self._attacker_progress = (height, self.clock)
            return
        limit = self.clique_config.sealer_limit or 1
        if self.clock - since >= limit * self.clique_config.block_period_ms:
            self.attacker_stall_ms = since
            logger.warning(
                f"Attacker side stuck at height {best} since {since} ms "
                f"(seed {self.seed})"
            )

    def _maybe_trigger(self) -> None:
        plan = self.plan
        if plan is None or self._window is not None:
            return
        if plan.partition.start_rule is not StartRule.BEFORE_ATTACKER_BLOCK:
            return
        attacker = plan.attacker
        if attacker.index not in self._dirty:
            return
        view = self.nodes[attacker.index].view
        head = view.head_block
        number = head.number or 0
        limit = self.clique_config.sealer_limit if self.clique_config else 1
        if (
            number >= plan.partition.min_trigger_number
            and (number + 1) % self.n == attacker.index
            and not signed_recently(view, attacker, limit or 1)
        ):
            self._open_attack_window(self._ceil_grid(self.clock))

    def _maybe_heal_early(self) -> None:
        plan = self.plan
        if (
            plan is None
            or not self._started
            or self._healed
            or self._heal_scheduled
            or self._window is None
            or plan.partition.heal_rule is HealRule.FIXED
        ):
            return
        tx1 = plan.txs.tx1.tx_id
        if tx1 not in self.commit_ms:
            return
        attacker = best_view(
            (self.nodes[a.index].view for a in plan.attackers),
            self.protocol,
            self.rule,
            self.n,
        )
        if attacker is None or self.fork_base is None:
            return
        if plan.partition.heal_rule is HealRule.BLIND_GAIN:
            # Blind split: heal once the attacker side out-weighs any victim gain.
            base_height = attacker.blocks[self.fork_base].height
            _, gain = branch_gain(attacker, base_height)
            ready = gain >= min_clique_blind_gain(self.n)
        else:
            victim = best_view(
                (
                    self.nodes[e].view
                    for e in sorted(plan.victim_group)
                    if e in self.network.active
                ),
                self.protocol,
                self.rule,
                self.n,
            )
            ready = victim is not None and fork_rank(
                attacker, self.protocol, self.rule, self.n
            ) > fork_rank(victim, self.protocol, self.rule, self.n)
            # Aura heals early only on a strictly taller branch; equal heights
            # are left to the window end.
            if ready and victim is not None and self.protocol is Protocol.AURA:
                ready = attacker.height > victim.height
        if not ready:
            return
        # Heal at the next poll tick, unless the window closes first anyway.
        heal_at = (self.clock // self.setup.poll_ms + 1) * self.setup.poll_ms
        if heal_at < self._window.end_ms:
            self._heal_scheduled = True
            self.queue.push(heal_at, EventKind.PARTITION_EDGE, payload="heal")

    # -- bookkeeping ---------------------------------------------------

    def _track_commits(self) -> None:
        for tracked in self._tracked:
            if not tracked.open or tracked.tx_id in self.commit_ms:
                continue
            for endpoint in sorted(self._dirty):
                if tracked.endpoints is not None and endpoint not in tracked.endpoints:
                    continue
                view = self.nodes[endpoint].view
                if is_tx_decided(view, tracked.tx_id, self.rule, self.n):
                    self.commit_ms[tracked.tx_id] = self.clock
                    break

    def _after_event(self) -> None:
        if not self._dirty:
            return
        self._track_commits()
        self._maybe_trigger()
        self._watch_attacker_progress()
        self._maybe_heal_early()
        self._dirty.clear()

    def _dispatch(self, event: Event) -> str:
        if event.kind is EventKind.DELIVER:
            return self._on_deliver(event)
        if event.kind is EventKind.TIMER:
            return self._on_timer(event)
        if event.kind is EventKind.INJECT_TX:
            return self._on_inject(event)
        return self._on_edge(event)

    def _bootstrap(self) -> None:
        for window in self.setup.partitions:
            edges = ((window.start_ms, "window-start"), (window.end_ms, "window-end"))
            for at_ms, edge in edges:
                self.queue.push(at_ms, EventKind.PARTITION_EDGE, payload=edge)
        for injection in self.setup.injections:
            self.queue.push(
                injection.at_ms,
                EventKind.INJECT_TX,
                tx=injection.tx,
                payload=injection.endpoints,
            )
            self._tracked.append(_Tracked(injection.tx.tx_id, None))
        plan = self.plan
        if plan is not None and plan.partition.start_rule is StartRule.ATTACKER_TURN:
            self._open_attack_window(plan.partition.start_ms or 0)
        for endpoint in sorted(self.nodes):
            if endpoint in self.network.active:
                self._schedule_timer(self.nodes[endpoint])

    def run(self) -> SimulationTrace:
        """
        Process events until the run ends.

        Raises:
            SimulationError: If an attack plan never opened its partition.

        """
        self._bootstrap()

        # Events past end_ms never fire; a heal moves end_ms
        while len(self.queue) and (self.queue.peek_ms() or 0) <= self.end_ms:
            event = self.queue.pop()
            self.clock = event.fire_ms
            detail = self._dispatch(event)
            # Record the event before the post-event checks
            if self.log is not None:
                self.log.record(event, detail)
            self._after_event()

        # An attack that never healed has no outcome to report
        if self.plan is not None and not self._healed:
            raise SimulationError(
                f"The attack partition never completed before {self.end_ms} ms "
                f"(seed {self.seed})"
            )
        return self._finish()

    def _finish(self) -> SimulationTrace:
        plan = self.plan
        final_views = {e: self.nodes[e].view for e in sorted(self.network.active)}
        if plan is not None:
            reference = min(plan.victim_side)
        else:
            reference = min(final_views)
        return SimulationTrace(
            protocol=self.protocol,
            n=self.n,
            seed=self.seed,
            end_ms=self.end_ms,
            final_views=final_views,
            reference_endpoint=reference,
            attacker_stall_ms=self.attacker_stall_ms,
            heal_views=self.heal_views,
            partition_start_ms=self.partition_start_ms,
            partition_end_ms=self.partition_end_ms,
            fork_base=self.fork_base,
            attacker_first_block=self.attacker_first_block,
            commit_ms=dict(self.commit_ms),
            log=self.log,
        )


def simulate(setup: SimulationSetup, seed: int) -> SimulationTrace:
    """Run ``setup`` with ``seed``; identical inputs give identical traces."""
    return Simulation(setup, seed).run()


def _plan_from_scenario(scenario: ScenarioConfig, placement_seed: int) -> AttackPlan:
    attack = scenario.attack
    if attack is None:
        raise ConfigError(f"Scenario {scenario.name} has no attack section")
    n = scenario.n
    timing = scenario.timing
    early_heal = attack.early_heal
    if scenario.protocol is Protocol.AURA:
        return plan_aura_attack(
            n=n,
            step_duration_ms=timing.step_duration_ms,
            partition_steps=attack.partition_steps or 0,
            placement_seed=placement_seed,
            clones=attack.clones,
            attacker=attack.attacker,
            attackers=attack.attackers,
            attacker_side=attack.attacker_side,
            early_heal=early_heal,
        )
    attacker = attack.attackers[0] if attack.attackers else attack.attacker
    if attack.strategy == "blind":
        return plan_clique_blind_attack(
            n=n,
            placement_seed=placement_seed,
            block_period_ms=timing.block_period_ms,
            duration_ms=attack.partition_ms,
            attacker=attacker,
        )
    return plan_clique_attack(
        n=n,
        consecutive_k=attack.division_k or n // 2 + 1,
        placement_seed=placement_seed,
        duration_ms=attack.partition_ms or 0,
        attacker=attacker,
        early_heal=early_heal,
    )


def setup_from_scenario(
    scenario: ScenarioConfig, placement_seed: int | None = None
) -> SimulationSetup:
    """
    Translate a validated scenario into a ``SimulationSetup``.

    Args:
        scenario: The scenario configuration.
        placement_seed: Seed of the random group placement; falls back to
                        ``scenario.placement_seed`` and then ``scenario.seed``.

    Raises:
        PlanError: If the attack cannot be planned for this network.
        ConfigError: If the pieces do not fit together.

    """
    if placement_seed is None:
        placement_seed = (
            scenario.placement_seed
            if scenario.placement_seed is not None
            else scenario.seed
        )
    plan = (
        _plan_from_scenario(scenario, placement_seed) if scenario.attack else None
    )
    injections = tuple(
        TxInjection(
            at_ms=item.at_ms,
            tx=Transaction(item.sender, item.recipient, item.amount, item.nonce),
            endpoints=frozenset(item.endpoints) if item.endpoints is not None else None,
        )
        for item in scenario.inject
    )
    partitions = tuple(
        PartitionWindow(
            window.start_ms,
            window.end_ms,
            tuple(frozenset(group) for group in window.groups),
        )
        for window in scenario.partitions
    )
    return SimulationSetup(
        protocol=scenario.protocol,
        n=scenario.n,
        step_duration_ms=scenario.timing.step_duration_ms,
        block_period_ms=scenario.timing.block_period_ms,
        wiggle_unit_ms=scenario.timing.wiggle_unit_ms,
        decision_rule=scenario.decision_rule.to_rule(scenario.protocol),
        delay=DelayModel(scenario.network.base_delay_ms, scenario.network.jitter_ms),
        poll_ms=scenario.network.poll_ms,
        silent=frozenset(scenario.silent_sealers),
        observers=scenario.observers,
        plan=plan,
        partitions=partitions,
        injections=injections,
        end_ms=scenario.end_ms,
        settle_rounds=scenario.settle_rounds,
        scripted_delays={
            (item.sealer, item.number): item.delay_ms
            for item in scenario.scripted_delays
        },
        record_trace=scenario.trace,
    )


def score_trace(setup: SimulationSetup, trace: SimulationTrace) -> RunOutcome:
    """Verdict of a finished run: double-spend scoring or the plain baseline."""
    if setup.plan is not None:
        return evaluate_double_spend(trace, setup.plan, setup.rule)
    tracked = setup.injections[0].tx.tx_id if setup.injections else None
    return baseline_outcome(trace, tracked)


def run_simulation(
    scenario: ScenarioConfig, seed: int, placement_seed: int | None = None
) -> RunOutcome:
    """
    Run one scenario with ``seed`` and score it.

    The placement seed defaults to the run seed so every run of a sweep
    draws its own balanced split.
    """
    if placement_seed is None and scenario.placement_seed is None:
        placement_seed = seed
    setup = setup_from_scenario(scenario, placement_seed)
    return score_trace(setup, simulate(setup, seed))

"""
Handles loading YAML configurations for poasim.

Presets ship as YAML files under ``poasim/experiments/config``; any other
argument is treated as a filesystem path. Every document carries a
``schema_version`` and a ``kind`` (``scenario``, ``sweep`` or ``region``)
that selects the pydantic model it is validated against. Validation errors
are reported as ``ConfigError`` with one ``field: message`` line per problem.
"""

from __future__ import annotations

import copy
from collections.abc import Mapping
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from poasim.analysis.region import Sync
from poasim.chain.models import DecisionRule, Protocol, RuleKind
from poasim.errors import ConfigError
from poasim.sim_config import (
    DEFAULT_ATTACK,
    DEFAULT_AURA,
    DEFAULT_CLIQUE,
    DEFAULT_NETWORK,
    SCHEMA_VERSION,
)

PRESET_SUFFIX = ".yaml"


def _get_config_path(name: str) -> Path:
    """
    Resolve a preset name or a path to a configuration file.

    Args:
        name: A preset name such as ``aura-fig4`` (looked up in
              ``experiments/config``) or a path to a YAML file.

    Returns:
        The path to the configuration file.

    """
    candidate = Path(name)
    if candidate.suffix in (".yaml", ".yml") or candidate.exists():
        return candidate
    # Presets live in 'experiments/config', a sibling of the 'utils' directory.
    base_path = Path(__file__).parent.parent / "experiments" / "config"
    return base_path / f"{name}{PRESET_SUFFIX}"


def list_presets() -> list[str]:
    """Names of the bundled presets."""
    base_path = Path(__file__).parent.parent / "experiments" / "config"
    return sorted(p.stem for p in base_path.glob(f"*{PRESET_SUFFIX}"))


def load_yaml_config(config_path: str) -> dict[str, Any]:
    """
    Load a generic YAML configuration file.

    Args:
        config_path: A preset name or a path to the YAML file.

    Returns:
        A dictionary containing the configuration.

    """
    full_path = _get_config_path(config_path)
    try:
        with open(full_path, encoding="utf-8") as file:
            config = yaml.safe_load(file)
            if not isinstance(config, dict) or not config:
                raise ValueError(
                    f"Config file at {full_path} is empty or not a valid dictionary."
                )
            return config
    except FileNotFoundError as e:
        raise FileNotFoundError(f"Config file not found at {full_path}") from e


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TimingConfig(_Strict):
    """Protocol clocks."""

    step_duration_ms: int = Field(
        DEFAULT_AURA["step_duration_ms"], gt=0, description="Aura step duration"
    )
    block_period_ms: int = Field(
        DEFAULT_CLIQUE["block_period_ms"], gt=0, description="Clique block period"
    )
    wiggle_unit_ms: int = Field(
        DEFAULT_CLIQUE["wiggle_unit_ms"],
        ge=0,
        description="Out-of-order delay bound per majority member",
    )


class NetworkConfig(_Strict):
    """Delay model and polling grid."""

    base_delay_ms: int = Field(DEFAULT_NETWORK["base_delay_ms"], ge=0)
    jitter_ms: int = Field(DEFAULT_NETWORK["jitter_ms"], ge=0)
    poll_ms: int = Field(DEFAULT_NETWORK["poll_ms"], gt=0)


class RuleConfig(_Strict):
    """Decision rule; the protocol's own rule when ``kind`` is omitted."""

    kind: RuleKind | None = None
    threshold: int | None = Field(None, ge=1, description="V for THRESHOLD rules")

    def to_rule(self, protocol: Protocol) -> DecisionRule:
        """Build the runtime rule."""
        if self.kind is None and self.threshold is not None:
            return DecisionRule.threshold_rule(self.threshold)
        if self.kind is None:
            return DecisionRule.for_protocol(protocol)
        return DecisionRule(self.kind, self.threshold)


class AttackConfig(_Strict):
    """Cloning-attack parameters."""

    strategy: Literal["order_aware", "blind"] = "order_aware"
    attacker: int = Field(DEFAULT_ATTACK["attacker"], ge=0)
    attackers: list[int] | None = Field(
        None, description="Explicit attacker indices (overrides attacker/clones)"
    )
    clones: int = Field(1, ge=1, le=2, description="Number of cloned identities t")
    attacker_side: list[int] | None = Field(
        None, description="Honest sealers pinned to the attacker side"
    )
    partition_steps: int | None = Field(None, ge=1, description="Aura window, steps")
    partition_ms: int | None = Field(None, gt=0, description="Clique window, ms")
    division_k: int | None = Field(
        None, description="Consecutive in-order sealers on the attacker side"
    )
    early_heal: bool = True

    @property
    def t(self) -> int:
        """Number of cloned identities."""
        return len(self.attackers) if self.attackers else self.clones


class PartitionWindowConfig(_Strict):
    """A static partition for runs without an attack."""

    start_ms: int = Field(..., ge=0)
    end_ms: int = Field(..., gt=0)
    groups: list[list[int]]


class InjectionConfig(_Strict):
    """A transaction handed to the network at ``at_ms``."""

    at_ms: int = Field(..., ge=0)
    sender: str = DEFAULT_ATTACK["sender"]
    recipient: str = DEFAULT_ATTACK["victim_recipient"]
    amount: int = DEFAULT_ATTACK["amount"]
    nonce: int = Field(0, ge=0)
    endpoints: list[int] | None = None


class ScriptedDelayConfig(_Strict):
    """Pinned seal delay of ``sealer`` for block ``number`` (Clique)."""

    sealer: int = Field(..., ge=0)
    number: int = Field(..., ge=1)
    delay_ms: int = Field(..., ge=0)


def _check_schema_version(version: int) -> None:
    if version != SCHEMA_VERSION:
        raise ValueError(
            f"unsupported schema_version {version}, expected {SCHEMA_VERSION}"
        )


class ScenarioConfig(_Strict):
    """One simulated configuration, run ``runs`` times."""

    kind: Literal["scenario"] = "scenario"
    schema_version: int = SCHEMA_VERSION
    name: str = "scenario"
    protocol: Protocol
    n: int = Field(9, ge=1, description="Number of sealers")
    timing: TimingConfig = Field(default_factory=TimingConfig)
    network: NetworkConfig = Field(default_factory=NetworkConfig)
    decision_rule: RuleConfig = Field(default_factory=RuleConfig)
    attack: AttackConfig | None = None
    partitions: list[PartitionWindowConfig] = Field(default_factory=list)
    inject: list[InjectionConfig] = Field(default_factory=list)
    silent_sealers: list[int] = Field(default_factory=list)
    observers: int = Field(0, ge=0)
    scripted_delays: list[ScriptedDelayConfig] = Field(default_factory=list)
    end_ms: int | None = Field(None, gt=0, description="Run length without attack")
    settle_rounds: int = Field(DEFAULT_ATTACK["settle_rounds"], ge=1)
    runs: int = Field(1, ge=1)
    seed: int = 0
    placement_seed: int | None = Field(
        None, description="Group placement seed; the run seed when omitted"
    )
    trace: bool = False

    @model_validator(mode="after")
    def check_consistency(self) -> ScenarioConfig:
        """Re-check the invariants that span several fields."""
        _check_schema_version(self.schema_version)
        n = self.n
        rule = self.decision_rule
        if (rule.kind is RuleKind.THRESHOLD or rule.threshold is not None) and not (
            rule.threshold is not None and 1 <= rule.threshold <= n
        ):
            raise ValueError(f"decision_rule.threshold must lie in [1, {n}]")
        if any(not 0 <= i < n for i in self.silent_sealers):
            raise ValueError(f"silent_sealers must lie in [0, {n})")
        if self.scripted_delays and self.protocol is not Protocol.CLIQUE:
            raise ValueError("scripted_delays only apply to clique")
        attack = self.attack
        if attack is None:
            if self.end_ms is None:
                raise ValueError("end_ms is required when there is no attack")
            return self
        if self.partitions:
            raise ValueError("partitions and attack are mutually exclusive")
        indices = attack.attackers if attack.attackers else [attack.attacker]
        if any(not 0 <= i < n for i in indices):
            raise ValueError(f"attack attackers must lie in [0, {n})")
        if self.protocol is Protocol.AURA:
            if attack.partition_steps is None:
                raise ValueError("attack.partition_steps is required for aura")
            if attack.strategy == "blind" or attack.division_k is not None:
                raise ValueError("blind and division_k attacks are clique-only")
            if n % 2 == 0 and attack.t < 2:
                raise ValueError(f"n={n} is even: the attack needs clones: 2")
        else:
            if attack.t != 1:
                raise ValueError("clique attacks use exactly one attacker")
            if n % 2 == 0:
                raise ValueError("clique attacks need an odd n")
            if attack.strategy == "order_aware":
                if attack.partition_ms is None:
                    raise ValueError("attack.partition_ms is required for clique")
                k = attack.division_k
                if k is not None and not 2 <= k <= n // 2 + 1:
                    raise ValueError(
                        f"attack.division_k must lie in [2, {n // 2 + 1}], got {k}"
                    )
        return self


class CurveConfig(_Strict):
    """One labelled curve of a sweep: overrides applied to the base scenario."""

    label: str
    set: dict[str, Any] = Field(default_factory=dict)


class AxisConfig(_Strict):
    """Sweep x axis: a dotted scenario path and its values (or an inclusive range)."""

    path: str
    values: list[int] | None = None
    start: int | None = None
    stop: int | None = None
    step: int | None = Field(None, gt=0)

    @model_validator(mode="after")
    def check_values(self) -> AxisConfig:
        """Exactly one of ``values`` or a ``start/stop/step`` range."""
        ranged = None not in (self.start, self.stop, self.step)
        if (self.values is None) == (not ranged):
            raise ValueError("give either values or start/stop/step")
        return self

    def points(self) -> list[int]:
        """The axis values in order."""
        if self.values is not None:
            return list(self.values)
        start, stop, step = self.start or 0, self.stop or 0, self.step or 1
        return list(range(start, stop + 1, step))


class PlotConfig(_Strict):
    """How the aggregate is charted."""

    title: str = ""
    xlabel: str = "x"
    ylabel: str = "success rate"
    metric: str = "success_rate"
    x_scale: float = Field(1.0, gt=0, description="Divide x by this on the chart")


class SweepConfig(_Strict):
    """A grid of scenarios (curves times x values) run ``runs`` times each."""

    kind: Literal["sweep"] = "sweep"
    schema_version: int = SCHEMA_VERSION
    name: str
    runs: int = Field(30, ge=1)
    seed: int = 0
    scenario: dict[str, Any]
    curves: list[CurveConfig] = Field(
        default_factory=lambda: [CurveConfig(label="default")]
    )
    x: AxisConfig
    plot: PlotConfig = Field(default_factory=PlotConfig)

    @model_validator(mode="after")
    def check_points(self) -> SweepConfig:
        """Every grid point must itself be a valid scenario."""
        _check_schema_version(self.schema_version)
        labels = [curve.label for curve in self.curves]
        if len(set(labels)) != len(labels):
            raise ValueError(f"curve labels must be unique, got {labels}")
        for curve in self.curves:
            for x in self.x.points():
                try:
                    self.point_scenario(curve, x)
                except ValidationError as e:
                    details = "; ".join(validation_details(e))
                    raise ValueError(f"point {curve.label}@{x}: {details}") from e
        return self

    def point_scenario(self, curve: CurveConfig, x: int) -> ScenarioConfig:
        """The scenario of one grid point."""
        overrides = dict(curve.set)
        overrides[self.x.path] = x
        data = apply_overrides(self.scenario, overrides)
        data.setdefault("name", f"{self.name}:{curve.label}")
        data["runs"] = self.runs
        data["seed"] = self.seed
        return ScenarioConfig.model_validate(data)


def scenario_as_sweep(scenario: ScenarioConfig) -> SweepConfig:
    """A single-point sweep running ``scenario`` ``scenario.runs`` times."""
    base = scenario.model_dump(mode="json", exclude={"kind", "runs", "seed", "trace"})
    return SweepConfig(
        name=scenario.name,
        runs=scenario.runs,
        seed=scenario.seed,
        scenario=base,
        curves=[CurveConfig(label=scenario.name)],
        x=AxisConfig(path="n", values=[scenario.n]),
    )


class RegionConfig(_Strict):
    """Safety/liveness grid for one n."""

    kind: Literal["region"] = "region"
    schema_version: int = SCHEMA_VERSION
    name: str = "region"
    n: int = Field(9, ge=1)
    sync: Sync = Sync.PARTIAL
    svg: bool = True

    @model_validator(mode="after")
    def check_version(self) -> RegionConfig:
        """Only the current schema version is accepted."""
        _check_schema_version(self.schema_version)
        return self


AnyConfig = ScenarioConfig | SweepConfig | RegionConfig

CONFIG_KINDS: dict[
    str, type[ScenarioConfig] | type[SweepConfig] | type[RegionConfig]
] = {
    "scenario": ScenarioConfig,
    "sweep": SweepConfig,
    "region": RegionConfig,
}


def apply_overrides(
    base: Mapping[str, Any], overrides: Mapping[str, Any]
) -> dict[str, Any]:
    """Return a deep copy of ``base`` with dotted-path ``overrides`` set."""
    data = copy.deepcopy(dict(base))
    for path, value in overrides.items():
        cursor = data
        parts = path.split(".")
        for part in parts[:-1]:
            nested = cursor.get(part)
            if not isinstance(nested, dict):
                nested = {}
                cursor[part] = nested
            cursor = nested
        cursor[parts[-1]] = value
    return data


def validation_details(error: ValidationError) -> list[str]:
    """One ``field: message`` line per pydantic error."""
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{location}: {item['msg']}")
    return lines


def parse_config(data: Mapping[str, Any], source: str = "<memory>") -> AnyConfig:
    """
    Validate a configuration mapping.

    Raises:
        ConfigError: On an unknown kind or any validation error.

    """
    kind = data.get("kind", "scenario")
    model = CONFIG_KINDS.get(kind)
    if model is None:
        raise ConfigError(
            f"Unknown config kind {kind!r} in {source}",
            [f"kind: expected one of {sorted(CONFIG_KINDS)}"],
        )
    try:
        return model.model_validate(dict(data))
    except ValidationError as e:
        raise ConfigError(
            f"Invalid {kind} config {source}", validation_details(e)
        ) from e


def load_config(name: str) -> AnyConfig:
    """
    Load and validate a preset or a YAML file.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If the YAML is empty or not a mapping.
        ConfigError: If the content does not validate.

    """
    data = load_yaml_config(name)
    return parse_config(data, str(_get_config_path(name)))

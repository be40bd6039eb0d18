"""Tests for preset loading and configuration validation."""

from __future__ import annotations

from pathlib import Path
from typing import Any

import pytest
from pydantic import ValidationError

from poasim.chain.models import Protocol, RuleKind
from poasim.errors import ConfigError
from poasim.experiments.sweep import sweep_points
from poasim.utils.config_loader import (
    AxisConfig,
    RegionConfig,
    RuleConfig,
    ScenarioConfig,
    SweepConfig,
    apply_overrides,
    list_presets,
    load_config,
    load_yaml_config,
    parse_config,
    scenario_as_sweep,
)

AURA_ATTACK: dict[str, Any] = {
    "protocol": "aura",
    "n": 9,
    "attack": {"partition_steps": 10},
}


class TestPresets:
    """The bundled YAML files."""

    def test_presets_are_listed(self) -> None:
        """Scenario, sweep and region presets ship with the package."""
        presets = list_presets()
        assert {"fig2", "fig3", "aura-fig4", "region-fig8"} <= set(presets)
        assert presets == sorted(presets)

    @pytest.mark.parametrize("name", list_presets())
    def test_every_preset_validates(self, name: str) -> None:
        """Each preset loads into the model its kind names."""
        config = load_config(name)
        assert config.name == name

    def test_aura_sweep_grid(self) -> None:
        """Three step durations times partitions of 8 to 12 steps."""
        config = load_config("aura-fig4")
        assert isinstance(config, SweepConfig)
        points = sweep_points(config)
        assert len(points) == 15
        first = points[0]
        assert first.point_id == "s3@8"
        assert first.scenario.timing.step_duration_ms == 3000
        assert first.scenario.attack is not None
        assert first.scenario.attack.partition_steps == 8
        assert first.scenario.runs == config.runs
        assert first.scenario.name == "aura-fig4:s3"
        assert points[-1].point_id == "s7@12"

    def test_region_preset(self) -> None:
        """The region preset is a plain grid description."""
        config = load_config("region-fig8")
        assert isinstance(config, RegionConfig)
        assert (config.n, config.sync.value) == (9, "partial")

    def test_unknown_preset(self) -> None:
        """Names that are neither presets nor files are reported missing."""
        with pytest.raises(FileNotFoundError):
            load_config("no-such-preset")


class TestYamlFiles:
    """Reading configuration files from disk."""

    def test_empty_file(self, tmp_path: Path) -> None:
        """An empty document is not a configuration."""
        path = tmp_path / "empty.yaml"
        path.write_text("", encoding="utf-8")
        with pytest.raises(ValueError, match="empty"):
            load_yaml_config(str(path))

    def test_missing_file(self, tmp_path: Path) -> None:
        """A missing path raises FileNotFoundError naming it."""
        with pytest.raises(FileNotFoundError, match="missing.yaml"):
            load_yaml_config(str(tmp_path / "missing.yaml"))

    def test_file_round_trip(self, tmp_path: Path) -> None:
        """A scenario written as YAML loads back as a scenario."""
        path = tmp_path / "run.yaml"
        path.write_text(
            "kind: scenario\nname: honest\nprotocol: clique\nn: 5\nend_ms: 20000\n",
            encoding="utf-8",
        )
        config = load_config(str(path))
        assert isinstance(config, ScenarioConfig)
        assert config.protocol is Protocol.CLIQUE
        assert config.timing.block_period_ms == 5000


class TestValidation:
    """Errors come out as ConfigError with one line per problem."""

    def test_unknown_kind(self) -> None:
        """Only scenario, sweep and region documents exist."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config({"kind": "plot"})
        assert "kind" in excinfo.value.details[0]

    def test_plain_run_needs_end(self) -> None:
        """Without an attack the run length is required."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config({"protocol": "aura", "n": 5})
        assert any("end_ms" in line for line in excinfo.value.details)

    def test_extra_fields_are_forbidden(self) -> None:
        """Typos are reported instead of silently ignored."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config({"kind": "region", "colour": "red"})
        assert any(line.startswith("colour") for line in excinfo.value.details)

    def test_schema_version(self) -> None:
        """Only the current schema version loads."""
        with pytest.raises(ConfigError, match="region"):
            parse_config({"kind": "region", "schema_version": 2})

    @pytest.mark.parametrize(
        ("fields", "fragment"),
        [
            (
                {"protocol": "clique", "n": 4, "attack": {"partition_ms": 20000}},
                "odd n",
            ),
            (
                {"protocol": "clique", "n": 9, "attack": {}},
                "partition_ms",
            ),
            ({"protocol": "aura", "n": 9, "attack": {}}, "partition_steps"),
            (
                {**AURA_ATTACK, "attack": {"partition_steps": 10, "division_k": 3}},
                "clique-only",
            ),
            ({"protocol": "aura", "n": 8, "attack": {"partition_steps": 10}}, "even"),
            (
                {**AURA_ATTACK, "decision_rule": {"kind": "threshold"}},
                "threshold",
            ),
            (
                {"protocol": "aura", "n": 5, "end_ms": 1000, "silent_sealers": [5]},
                "silent_sealers",
            ),
            (
                {
                    "protocol": "aura",
                    "n": 5,
                    "end_ms": 1000,
                    "scripted_delays": [{"sealer": 1, "number": 2, "delay_ms": 5}],
                },
                "clique",
            ),
        ],
    )
    def test_inconsistent_scenarios(
        self, fields: dict[str, Any], fragment: str
    ) -> None:
        """Cross-field invariants are checked on load."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config(fields)
        assert any(fragment in line for line in excinfo.value.details)

    def test_division_range(self) -> None:
        """k must leave the attacker side a majority of in-order sealers."""
        fields: dict[str, Any] = {
            "protocol": "clique",
            "n": 9,
            "attack": {"partition_ms": 20000, "division_k": 6},
        }
        with pytest.raises(ConfigError, match="Invalid scenario"):
            parse_config(fields)
        fields["attack"]["division_k"] = 5
        assert isinstance(parse_config(fields), ScenarioConfig)

    def test_even_aura_with_two_clones(self) -> None:
        """Two clones make the attack possible for even n."""
        config = parse_config(
            {"protocol": "aura", "n": 8, "attack": {"partition_steps": 9, "clones": 2}}
        )
        assert isinstance(config, ScenarioConfig)
        assert config.attack is not None and config.attack.t == 2

    def test_sweep_points_are_validated(self) -> None:
        """A bad grid point is reported with its id."""
        data = {
            "kind": "sweep",
            "name": "thresholds",
            "scenario": AURA_ATTACK,
            "x": {"path": "decision_rule.threshold", "values": [5, 12]},
        }
        with pytest.raises(ConfigError) as excinfo:
            parse_config(data)
        assert any("default@12" in line for line in excinfo.value.details)

    def test_curve_labels_are_unique(self) -> None:
        """Two curves cannot share a label."""
        data = {
            "kind": "sweep",
            "name": "dup",
            "scenario": AURA_ATTACK,
            "curves": [{"label": "a"}, {"label": "a"}],
            "x": {"path": "attack.partition_steps", "values": [9]},
        }
        with pytest.raises(ConfigError):
            parse_config(data)


class TestAxis:
    """Sweep x axes."""

    def test_inclusive_range(self) -> None:
        """Ranges include their stop value."""
        axis = AxisConfig(path="attack.partition_ms", start=20, stop=30, step=5)
        assert axis.points() == [20, 25, 30]

    @pytest.mark.parametrize(
        "fields",
        [
            {"path": "n"},
            {"path": "n", "values": [1], "start": 1, "stop": 2, "step": 1},
        ],
    )
    def test_values_or_range(self, fields: dict[str, Any]) -> None:
        """Exactly one of the two forms is accepted."""
        with pytest.raises(ValidationError):
            AxisConfig.model_validate(fields)


class TestHelpers:
    """Override paths, rule translation and single-point sweeps."""

    def test_apply_overrides_sets_nested_paths(self) -> None:
        """Dotted paths create missing levels and leave the base untouched."""
        base = {"attack": {"partition_steps": 8}, "n": 9}
        merged = apply_overrides(
            base, {"attack.clones": 2, "timing.step_duration_ms": 5000, "n": 7}
        )
        assert merged == {
            "attack": {"partition_steps": 8, "clones": 2},
            "timing": {"step_duration_ms": 5000},
            "n": 7,
        }
        assert base == {"attack": {"partition_steps": 8}, "n": 9}

    def test_rule_translation(self) -> None:
        """A bare threshold means a threshold rule; nothing means the default."""
        assert RuleConfig().to_rule(Protocol.CLIQUE).kind is RuleKind.CLIQUE_MAJORITY
        assert RuleConfig().to_rule(Protocol.AURA).kind is RuleKind.AURA_MAJORITY
        rule = RuleConfig(threshold=6).to_rule(Protocol.AURA)
        assert (rule.kind, rule.threshold) == (RuleKind.THRESHOLD, 6)
        assert rule.label() == "threshold:6"

    def test_scenario_as_sweep(self) -> None:
        """A scenario becomes a one-point sweep with its own runs and seed."""
        config = load_config("fig2")
        assert isinstance(config, ScenarioConfig)
        sweep = scenario_as_sweep(config)
        points = sweep_points(sweep)
        assert len(points) == 1
        assert (sweep.runs, sweep.seed) == (config.runs, config.seed)
        assert points[0].scenario.attack == config.attack
        assert points[0].scenario.timing == config.timing

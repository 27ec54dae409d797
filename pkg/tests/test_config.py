"""Tests for configuration parsing, presets and key-named errors."""

import pytest

from src.config import (
    AlphaPolicyKind,
    Preset,
    db_to_linear,
    linear_to_db,
    parse_alpha_policy,
    parse_config,
    read_document,
)
from src.errors import ConfigError, GeometryError
from src.montecarlo import SimStrategy


def test_defaults():
    geometry, params, spec = parse_config()
    assert geometry.source == (0.0,) and geometry.dest == (12.0,)
    assert geometry.region_min == (1.0,) and geometry.region_max == (11.0,)
    assert params.gamma0 == pytest.approx(1000.0)
    assert (params.p, params.alpha, params.epsilon) == (0.1, 0.5, 0.1)
    assert spec.preset is Preset.CUSTOM
    assert spec.alpha_policy.kind is AlphaPolicyKind.FIXED and spec.alpha_policy.value == 0.5
    assert spec.gamma0_grid_db() == [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0]


def test_fig4_preset_defaults():
    _, _, spec = parse_config("sweep.preset = FIG4\n")
    assert spec.preset is Preset.FIG4
    assert spec.epsilons == (0.1, 0.01)
    assert spec.ps == (0.1,)
    assert spec.alpha_policy.kind is AlphaPolicyKind.OPTIMAL
    assert spec.fillers["sweep.alpha_policy"] == "optimal"


def test_fig3_preset_simulation_axes():
    _, params, spec = parse_config("sweep.preset = fig3\n")
    assert params.p == 0.2
    assert spec.n_relays == (50, 200, 500)
    assert spec.strategies == (SimStrategy.MAC, SimStrategy.AF, SimStrategy.DF)
    assert spec.target_rates[0] == 0.25


def test_document_overrides_preset_and_flags_override_document():
    text = "sweep.preset = FIG5\nsweep.ps = 0.2\nsystem.p = 0.3\n"
    _, params, spec = parse_config(text, overrides={"system.p": "0.4", "system.alpha": None})
    assert spec.ps == (0.2,)
    assert params.p == 0.4
    assert params.alpha == 0.5


def test_comments_and_quotes():
    document = read_document('# operating point\nsystem.p = "0.25"  # attacked\nsystem.alpha=0.3\n')
    assert document == {"system.p": "0.25", "system.alpha": "0.3"}


@pytest.mark.parametrize(
    "text, key",
    [
        ("system.p = 1.5\n", "system.p"),
        ("system.alpha = 1.0\n", "system.alpha"),
        ("system.epsilon = 0\n", "system.epsilon"),
        ("system.p = lots\n", "system.p"),
        ("system.gamma0_db = 1e6\n", "system.gamma0_db"),
        ("sweep.preset = FIG9\n", "sweep.preset"),
        ("sweep.gamma0_db_step = 0\n", "sweep.gamma0_db_step"),
        ("sweep.alpha_policy = sometimes\n", "sweep.alpha_policy"),
        ("sim.strategy = XF\n", "sim.strategy"),
        ("sim.resample_positions = maybe\n", "sim.resample_positions"),
        ("geometry.source = 0\ngeometry.dimension = 2\n", "geometry.source"),
    ],
)
def test_bad_values_name_their_key(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key
    assert str(info.value).startswith(f"{key}:")


def test_unknown_key():
    with pytest.raises(ConfigError) as info:
        parse_config("system.q = 0.1\n")
    assert info.value.key == "system.q"


def test_missing_value():
    with pytest.raises(ConfigError) as info:
        read_document("system.p =\n")
    assert info.value.key == "system.p"


def test_unknown_override_key():
    with pytest.raises(ConfigError):
        parse_config("", overrides={"sim.speed": "fast"})


def test_dead_zone_violation_names_region_key():
    with pytest.raises(GeometryError) as info:
        parse_config("geometry.region_min = 0.5\n")
    assert info.value.key == "geometry.region_min"


def test_planar_defaults():
    geometry, _, _ = parse_config("geometry.dimension = 2\n")
    assert geometry.dimension == 2
    assert geometry.source == (0.0, 0.0)
    assert geometry.region_max == (11.0, 5.0)


def test_alpha_policy_forms():
    assert parse_alpha_policy("optimal", 0.5).kind is AlphaPolicyKind.OPTIMAL
    assert parse_alpha_policy("fixed", 0.3).value == 0.3
    assert parse_alpha_policy("fixed:0.6", 0.3).value == 0.6
    assert parse_alpha_policy("0.7", 0.3).value == 0.7
    assert str(parse_alpha_policy("fixed:0.6", 0.3)) == "fixed:0.6"


def test_db_conversion():
    assert db_to_linear(30.0) == pytest.approx(1000.0)
    assert linear_to_db(0.1) == pytest.approx(-10.0)

import math

import pytest

from nearfield_crb import ValidationError, default_scenario
from nearfield_crb.config import ConfigError, default_config_text, echo_config, load_config, parse_config

MINIMAL = """\
[array]
antennas = 16
radius_m = 0.5
[target]
range_m = 10
angle_deg = 45
[ofdm]
carrier_hz = 28e9
subcarriers = 8
spacing_hz = 1e5
symbols = 4
[budget]
snr_db = 10
"""


def test_bundled_default_matches_reference_scenario():
    cfg = load_config()
    assert cfg.scenario == default_scenario()
    assert cfg.paths == ("closed", "exact")
    assert cfg.covariance == "isotropic" and cfg.seed == 0
    assert cfg.settings.rel_tol == 1e-10


def test_minimal_config_and_defaults():
    cfg = parse_config(MINIMAL)
    sc = cfg.scenario
    assert sc.target.angle == pytest.approx(math.pi / 4)
    assert sc.grid.subcarrier_spacing_hz == 1e5
    assert sc.budget.snr_db == pytest.approx(10)
    assert cfg.paths == ("closed", "exact")


def test_spacing_builds_radius():
    text = MINIMAL.replace("antennas = 16", "antennas = 256").replace(
        "radius_m = 0.5", f"spacing_m = {299792458 / (2 * 30e9)!r}")
    assert parse_config(text).scenario.geometry.radius == pytest.approx(0.20358, abs=1e-5)


def test_explicit_budget_triple():
    text = MINIMAL.replace("snr_db = 10", "gain_sq = 2\npower_w = 3\nnoise_w = 0.5")
    b = parse_config(text).scenario.budget
    assert (b.gain_magnitude_sq, b.power_per_subcarrier, b.noise_variance) == (2, 3, 0.5)


@pytest.mark.parametrize("edit, match", [
    (("radius_m = 0.5", "radius_m = 0.5\nspacing_m = 0.01"), "radius_m and spacing_m"),
    (("spacing_hz = 1e5", "spacing_hz = 1e5\nbandwidth_hz = 1e6"), "spacing_hz and bandwidth_hz"),
    (("snr_db = 10", "snr_db = 10\nnoise_w = 1"), "snr_db cannot be combined"),
    (("snr_db = 10", "noise_w = 1"), "all of gain_sq"),
    (("symbols = 4", "symbols = 4\ncolour = red"), "unknown key 'colour'"),
    (("[budget]", "[extras]\n[budget]"), "unknown section"),
    (("range_m = 10", "range_m = 0.3"), "must exceed array radius"),
    (("antennas = 16", "antennas = 16.5"), "must be an integer"),
    (("carrier_hz = 28e9", "carrier_hz = fast"), "not a number"),
    (("symbols = 4", "symbols = 4\n[compute]\npaths = closed, guess"), "paths"),
    (("symbols = 4", "symbols = 4\n[compute]\ncovariance = omni"), "covariance"),
    (("angle_deg = 45\n", ""), "angle_deg"),
])
def test_constraint_errors(edit, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(MINIMAL.replace(*edit))


@pytest.mark.parametrize("text, line", [
    ("[array]\nantennas 16\n", 2),
    ("antennas = 16\n", 1),
    ("[array]\nantennas = 16\n  radius_m = 0.5\n", 3),
    ("[array]\nantennas = 16\nantennas = 17\n", 3),
])
def test_syntax_errors_report_line(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert info.value.column is not None


def test_config_error_is_validation_error():
    assert issubclass(ConfigError, ValidationError)


def test_comments_allowed():
    text = "# leading comment\n" + MINIMAL.replace("symbols = 4", "symbols = 4  # per frame")
    assert parse_config(text).scenario.grid.n_symbols == 4


def test_echo_round_trip():
    for text in (default_config_text(), MINIMAL):
        cfg = parse_config(text)
        again = parse_config("\n".join(echo_config(cfg)) + "\n")
        assert again.scenario == cfg.scenario
        assert (again.paths, again.covariance, again.seed, again.settings) == (
            cfg.paths, cfg.covariance, cfg.seed, cfg.settings)


def test_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("/nonexistent/cfg.ini")

"""INI-style scenario configuration.

    [array]    antennas, radius_m | spacing_m
    [target]   range_m, angle_deg
    [ofdm]     carrier_hz, subcarriers, spacing_hz | bandwidth_hz, symbols
    [budget]   snr_db | (gain_sq, power_w, noise_w)
    [compute]  paths, covariance, seed, rel_tol        (all optional)

Unknown sections or keys are errors. The raw value strings are kept so a
config echoed into CSV metadata re-parses to a bit-identical scenario.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from importlib import resources

from .crb_exact import CovarianceSpec
from .errors import ValidationError
from .experiments import COVARIANCES, PATHS
from .geometry import ArrayGeometry, TargetLocation
from .scenario import Scenario, SensingBudget
from .specfun import QuadratureSettings
from .waveform import OfdmGrid

SCHEMA = {
    "array": ("antennas", "radius_m", "spacing_m"),
    "target": ("range_m", "angle_deg"),
    "ofdm": ("carrier_hz", "subcarriers", "spacing_hz", "bandwidth_hz", "symbols"),
    "budget": ("snr_db", "gain_sq", "power_w", "noise_w"),
    "compute": ("paths", "covariance", "seed", "rel_tol"),
}
COMPUTE_DEFAULTS = {"paths": "closed, exact", "covariance": "isotropic", "seed": "0", "rel_tol": "1e-10"}


class ConfigError(ValidationError):
    def __init__(self, message, line=None, column=None):
        self.line, self.column = line, column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    paths: tuple = ("closed", "exact")
    covariance: str = "isotropic"
    seed: int = 0
    settings: QuadratureSettings = QuadratureSettings()
    raw: dict = field(default_factory=dict, compare=False)

    def covariance_spec(self) -> CovarianceSpec:
        if self.covariance == "directional":
            return CovarianceSpec.directional(self.scenario.target)
        return CovarianceSpec.isotropic()


def default_config_text() -> str:
    return resources.files("nearfield_crb").joinpath("data/default.ini").read_text()


def _column_of(line: str) -> int:
    return len(line) - len(line.lstrip()) + 1


def _read(text: str) -> configparser.ConfigParser:
    lines = text.splitlines()
    for i, line in enumerate(lines, 1):
        # configparser would silently fold indented lines into the previous value
        if line.strip() and line[0] in " \t" and not line.lstrip().startswith("#"):
            raise ConfigError("indented line (continuation values are not supported)", i, _column_of(line))
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",),
                                   inline_comment_prefixes=("#",), strict=True)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of a [section]", exc.lineno, _column_of(exc.line)) from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"cannot parse {line.strip()!r}; expected 'key = value'", lineno,
                          _column_of(line.strip("'"))) from None
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
        raise ConfigError(exc.message, exc.lineno, 1) from None
    return cp


def _number(raw, section, key, kind=float):
    text = raw[section][key]
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {text!r} is not a number") from None
    if not math.isfinite(value):
        raise ConfigError(f"[{section}] {key} must be finite")
    if kind is int:
        if value != int(value):
            raise ConfigError(f"[{section}] {key} = {text!r} must be an integer")
        return int(value)
    return value


def _one_of(raw, section, keys):
    present = [k for k in keys if k in raw[section]]
    if len(present) != 1:
        if present:
            raise ConfigError(f"[{section}] give exactly one of {' / '.join(keys)}, got both {' and '.join(present)}")
        raise ConfigError(f"[{section}] missing key: one of {' / '.join(keys)} is required")
    return present[0]


def _require(raw, section, key):
    if key not in raw[section]:
        raise ConfigError(f"[{section}] missing required key {key!r}")


def parse_config(text: str) -> RunConfig:
    cp = _read(text)
    raw = {section: dict(cp[section]) for section in cp.sections()}
    for section, entries in raw.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]; valid: {', '.join(SCHEMA)}")
        for key in entries:
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]; valid: {', '.join(SCHEMA[section])}")
    for section in SCHEMA:
        raw.setdefault(section, {})

    _require(raw, "array", "antennas")
    size_key = _one_of(raw, "array", ("radius_m", "spacing_m"))
    for key in ("range_m", "angle_deg"):
        _require(raw, "target", key)
    for key in ("carrier_hz", "subcarriers", "symbols"):
        _require(raw, "ofdm", key)
    band_key = _one_of(raw, "ofdm", ("spacing_hz", "bandwidth_hz"))

    budget = raw["budget"]
    triple = ("gain_sq", "power_w", "noise_w")
    if "snr_db" in budget:
        clash = [k for k in triple if k in budget]
        if clash:
            raise ConfigError(f"[budget] snr_db cannot be combined with {', '.join(clash)}")
    elif not all(k in budget for k in triple):
        raise ConfigError("[budget] give snr_db, or all of gain_sq, power_w, noise_w")

    compute = {**COMPUTE_DEFAULTS, **raw["compute"]}
    paths = tuple(p.strip() for p in compute["paths"].split(",") if p.strip())
    if not paths or any(p not in PATHS for p in paths):
        raise ConfigError(f"[compute] paths = {compute['paths']!r}; choose from {', '.join(PATHS)}")
    covariance = compute["covariance"].strip()
    if covariance not in COVARIANCES:
        raise ConfigError(f"[compute] covariance = {covariance!r}; choose from {', '.join(COVARIANCES)}")
    raw["compute"] = compute

    def checked(build, key):
        try:
            return build()
        except ValidationError as exc:
            raise ConfigError(f"{key}: {exc}") from None

    n_antennas = _number(raw, "array", "antennas", int)
    size = _number(raw, "array", size_key)
    geometry = checked(lambda: ArrayGeometry(n_antennas, size) if size_key == "radius_m"
                       else ArrayGeometry.from_spacing(n_antennas, size), f"[array] {size_key}")
    target = checked(lambda: TargetLocation(_number(raw, "target", "range_m"),
                                            math.radians(_number(raw, "target", "angle_deg"))), "[target] range_m")
    carrier = _number(raw, "ofdm", "carrier_hz")
    M = _number(raw, "ofdm", "subcarriers", int)
    L = _number(raw, "ofdm", "symbols", int)
    band = _number(raw, "ofdm", band_key)
    grid = checked(lambda: OfdmGrid(carrier, M, band, L) if band_key == "spacing_hz"
                   else OfdmGrid.from_bandwidth(carrier, M, band, L), f"[ofdm] {band_key}")
    if "snr_db" in budget:
        sb = SensingBudget.from_snr_db(_number(raw, "budget", "snr_db"))
    else:
        sb = checked(lambda: SensingBudget(_number(raw, "budget", "power_w"), _number(raw, "budget", "gain_sq"),
                                           _number(raw, "budget", "noise_w")), "[budget]")
    scenario = checked(lambda: Scenario(geometry, target, grid, sb), "[target] range_m")
    settings = checked(lambda: QuadratureSettings(rel_tol=_number(raw, "compute", "rel_tol")), "[compute] rel_tol")
    seed = _number(raw, "compute", "seed", int)
    return RunConfig(scenario, paths, covariance, seed, settings, raw)


def load_config(path: str | None = None) -> RunConfig:
    if path is None:
        return parse_config(default_config_text())
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    return parse_config(text)


def echo_config(cfg: RunConfig) -> list[str]:
    """Canonical config text, one line per entry, that re-parses to ``cfg``."""
    lines = []
    for section in SCHEMA:
        entries = cfg.raw.get(section, {})
        if not entries:
            continue
        lines.append(f"[{section}]")
        lines += [f"{key} = {entries[key]}" for key in SCHEMA[section] if key in entries]
    return lines

"""Sensing budget and the composite scenario shared by both CRB paths."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ValidationError
from .geometry import ArrayGeometry, TargetLocation, check_near_field
from .waveform import SPEED_OF_LIGHT, OfdmGrid

K0 = 2 * math.pi / SPEED_OF_LIGHT


@dataclass(frozen=True)
class SensingBudget:
    power_per_subcarrier: float = 1.0
    gain_magnitude_sq: float = 1.0
    noise_variance: float = 1.0

    def __post_init__(self):
        for name in ("power_per_subcarrier", "gain_magnitude_sq", "noise_variance"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValidationError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, float(value))

    @classmethod
    def from_snr_db(cls, snr_db: float) -> "SensingBudget":
        """Unit power and gain; the noise variance carries the SNR |beta|^2 P / sigma^2."""
        return cls(1.0, 1.0, 10 ** (-snr_db / 10))

    @property
    def snr(self) -> float:
        return self.gain_magnitude_sq * self.power_per_subcarrier / self.noise_variance

    @property
    def snr_db(self) -> float:
        return 10 * math.log10(self.snr)

    @property
    def rho(self) -> float:
        return K0**2 * self.snr


@dataclass(frozen=True)
class Scenario:
    geometry: ArrayGeometry
    target: TargetLocation
    grid: OfdmGrid
    budget: SensingBudget = SensingBudget()

    def __post_init__(self):
        check_near_field(self.geometry, self.target)

    @property
    def aperture_ratio(self) -> float:
        return self.geometry.radius / self.target.range

    def with_(self, **changes) -> "Scenario":
        """Copy with component fields replaced, e.g. ``sc.with_(n_antennas=64, range=20.0)``."""
        parts = {"geometry": self.geometry, "target": self.target, "grid": self.grid, "budget": self.budget}
        grouped = {name: {} for name in parts}
        for key, value in changes.items():
            for name, part in parts.items():
                if key in part.__dataclass_fields__:
                    grouped[name][key] = value
                    break
            else:
                raise ValidationError(f"unknown scenario field {key!r}")
        # one replace per component so intermediate states are never validated
        for name, fields in grouped.items():
            if fields:
                parts[name] = replace(parts[name], **fields)
        return Scenario(**parts)


def default_scenario() -> Scenario:
    """r = 15 m, theta = 90 deg, f_c = 30 GHz, B = 10 MHz, L = M = N = 256, R = 0.5 m, SNR 0 dB."""
    return Scenario(
        geometry=ArrayGeometry(256, 0.5),
        target=TargetLocation(15.0, math.pi / 2),
        grid=OfdmGrid.from_bandwidth(30e9, 256, 10e6, n_symbols=256),
        budget=SensingBudget.from_snr_db(0.0),
    )

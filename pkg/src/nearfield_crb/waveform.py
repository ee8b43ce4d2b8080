"""OFDM subcarrier grid and its spectral moments."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class OfdmGrid:
    carrier_hz: float
    n_subcarriers: int
    subcarrier_spacing_hz: float
    n_symbols: int = 1

    def __post_init__(self):
        for name in ("n_subcarriers", "n_symbols"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValidationError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        for name in ("carrier_hz", "subcarrier_spacing_hz"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValidationError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not self.lowest_frequency_hz > 0:
            raise ValidationError(
                f"subcarrier grid crosses DC: lowest frequency {self.lowest_frequency_hz!r} Hz"
            )

    @classmethod
    def from_bandwidth(cls, carrier_hz: float, n_subcarriers: int, bandwidth_hz: float,
                       n_symbols: int = 1) -> "OfdmGrid":
        if not bandwidth_hz > 0:
            raise ValidationError(f"bandwidth must be positive, got {bandwidth_hz!r}")
        return cls(carrier_hz, n_subcarriers, bandwidth_hz / n_subcarriers, n_symbols)

    @property
    def bandwidth_hz(self) -> float:
        return self.n_subcarriers * self.subcarrier_spacing_hz

    @property
    def lowest_frequency_hz(self) -> float:
        return self.carrier_hz - (self.n_subcarriers - 1) / 2 * self.subcarrier_spacing_hz

    @property
    def offsets(self) -> np.ndarray:
        """Half-integer subcarrier offsets delta_m = (2m - M + 1) / 2."""
        m = np.arange(self.n_subcarriers)
        return (2 * m - self.n_subcarriers + 1) / 2


@dataclass(frozen=True)
class SpectralMoments:
    m_tilde: float  # sum of f_m^2, Hz^2
    m_bar: float  # sum of f_m, Hz


def subcarrier_frequencies(grid: OfdmGrid) -> np.ndarray:
    return grid.carrier_hz + grid.offsets * grid.subcarrier_spacing_hz


def spectral_moments(grid: OfdmGrid) -> SpectralMoments:
    M, fc, df = grid.n_subcarriers, grid.carrier_hz, grid.subcarrier_spacing_hz
    return SpectralMoments(
        m_tilde=M * fc**2 + M * (M**2 - 1) * df**2 / 12,
        m_bar=M * fc,
    )


def wavenumbers(grid: OfdmGrid) -> np.ndarray:
    return 2 * np.pi * subcarrier_frequencies(grid) / SPEED_OF_LIGHT

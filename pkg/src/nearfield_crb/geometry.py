"""Uniform circular array layout and near-field propagation distances.

Antennas are indexed n = 1..N with azimuth psi_n = 2*pi*n/N; arrays returned
here are 0-based, so entry ``i`` belongs to antenna ``n = i + 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# Smallest admissible antenna-to-target distance in meters.
MIN_DISTANCE = 1e-9


@dataclass(frozen=True)
class ArrayGeometry:
    n_antennas: int
    radius: float

    def __post_init__(self):
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 3:
            raise ValidationError(f"n_antennas must be an integer >= 3, got {self.n_antennas!r}")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValidationError(f"radius must be positive and finite, got {self.radius!r}")
        object.__setattr__(self, "n_antennas", int(self.n_antennas))
        object.__setattr__(self, "radius", float(self.radius))

    @classmethod
    def from_spacing(cls, n_antennas: int, spacing: float) -> "ArrayGeometry":
        """Build a UCA whose adjacent elements are ``spacing`` apart along the arc (R = N d / 2 pi)."""
        if not spacing > 0:
            raise ValidationError(f"spacing must be positive, got {spacing!r}")
        return cls(n_antennas, n_antennas * spacing / (2 * math.pi))

    @property
    def spacing(self) -> float:
        return 2 * math.pi * self.radius / self.n_antennas

    @property
    def azimuths(self) -> np.ndarray:
        n = np.arange(1, self.n_antennas + 1)
        return 2 * np.pi * n / self.n_antennas


@dataclass(frozen=True)
class TargetLocation:
    range: float
    angle: float

    def __post_init__(self):
        if not (self.range > 0 and math.isfinite(self.range)):
            raise ValidationError(f"target range must be positive and finite, got {self.range!r}")
        if not math.isfinite(self.angle):
            raise ValidationError(f"target angle must be finite, got {self.angle!r}")
        object.__setattr__(self, "range", float(self.range))
        object.__setattr__(self, "angle", float(self.angle) % (2 * math.pi))

    @property
    def position(self) -> np.ndarray:
        return self.range * np.array([math.cos(self.angle), math.sin(self.angle)])


def antenna_positions(geom: ArrayGeometry) -> np.ndarray:
    """(N, 2) array of antenna coordinates s_n = R [cos psi_n, sin psi_n]."""
    psi = geom.azimuths
    return geom.radius * np.column_stack([np.cos(psi), np.sin(psi)])


def check_near_field(geom: ArrayGeometry, tgt: TargetLocation) -> None:
    """Raise ValidationError unless the target lies strictly outside the array circle."""
    if not tgt.range > geom.radius:
        raise ValidationError(
            f"target range r={tgt.range!r} m must exceed array radius R={geom.radius!r} m"
        )
    if tgt.range - geom.radius <= MIN_DISTANCE:
        raise ValidationError(
            f"target is within {MIN_DISTANCE} m of the array circle (r={tgt.range!r}, R={geom.radius!r})"
        )


def _angle_offsets(geom: ArrayGeometry, tgt: TargetLocation) -> np.ndarray:
    # theta - psi_n with psi_N wrapped to 0, so theta == psi_k gives exactly 0
    n = np.arange(1, geom.n_antennas + 1) % geom.n_antennas
    return tgt.angle - 2 * np.pi * n / geom.n_antennas


def propagation_distances(geom: ArrayGeometry, tgt: TargetLocation) -> np.ndarray:
    """Exact distances r_n = sqrt(r^2 + R^2 - 2 r R cos(theta - psi_n))."""
    check_near_field(geom, tgt)
    r, R = tgt.range, geom.radius
    delta = _angle_offsets(geom, tgt)
    # (r - R)^2 + 4 r R sin^2(delta/2) avoids cancellation when r ~ R
    return np.sqrt((r - R) ** 2 + 4 * r * R * np.sin(delta / 2) ** 2)


def distance_derivatives(geom: ArrayGeometry, tgt: TargetLocation) -> tuple[np.ndarray, np.ndarray]:
    """Return (d r_n / d theta, d r_n / d r) for every antenna.

    These are the diagonals of the derivative matrices used when
    differentiating the array response with respect to angle and range.
    """
    dist = propagation_distances(geom, tgt)
    r, R = tgt.range, geom.radius
    delta = _angle_offsets(geom, tgt)
    d_theta = r * R * np.sin(delta) / dist
    d_range = ((r - R) + 2 * R * np.sin(delta / 2) ** 2) / dist
    return d_theta, d_range

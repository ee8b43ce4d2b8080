"""Per-antenna derivative sums, exact and in the large-N closed form.

The closed forms are the continuum limits of equispaced sums of smooth
periodic functions, so the discrete sums converge geometrically in N
(roughly like (R/r)^N). Accuracy is not characterised for 1 < r/R < 1.1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ArrayGeometry, TargetLocation, check_near_field, distance_derivatives
from .specfun import DEFAULT_SETTINGS, QuadratureSettings, k_alpha


@dataclass(frozen=True)
class GeometrySums:
    u_theta: float  # sum (dr_n/dtheta)^2
    u_r: float  # sum (dr_n/dr)^2
    c_theta: float  # sum dr_n/dtheta
    c_r: float  # sum dr_n/dr
    eta: float  # sum (dr_n/dtheta)(dr_n/dr)


def exact_sums(geom: ArrayGeometry, tgt: TargetLocation) -> GeometrySums:
    d_theta, d_range = distance_derivatives(geom, tgt)
    return GeometrySums(
        u_theta=math.fsum(d_theta * d_theta),
        u_r=math.fsum(d_range * d_range),
        c_theta=math.fsum(d_theta),
        c_r=math.fsum(d_range),
        eta=math.fsum(d_theta * d_range),
    )


def closed_form_sums(geom: ArrayGeometry, tgt: TargetLocation,
                     settings: QuadratureSettings = DEFAULT_SETTINGS) -> GeometrySums:
    check_near_field(geom, tgt)
    N, R, r = geom.n_antennas, geom.radius, tgt.range
    u_theta = R * R * N / 2
    return GeometrySums(
        u_theta=u_theta,
        u_r=N - u_theta / (r * r),
        c_theta=0.0,
        c_r=N * k_alpha(r / R, settings),
        eta=0.0,
    )

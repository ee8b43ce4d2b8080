import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from nearfield_crb import (
    ArrayGeometry, TargetLocation, ValidationError, antenna_positions, distance_derivatives, propagation_distances,
)
from nearfield_crb.geometry import MIN_DISTANCE, check_near_field
from nearfield_crb.waveform import SPEED_OF_LIGHT


def test_azimuths_are_equispaced_and_end_at_two_pi():
    g = ArrayGeometry(8, 1.0)
    assert_allclose(g.azimuths, 2 * np.pi * np.arange(1, 9) / 8)
    assert g.azimuths[-1] == 2 * np.pi


def test_antenna_positions_on_circle():
    pos = antenna_positions(ArrayGeometry(16, 0.7))
    assert pos.shape == (16, 2)
    assert_allclose(np.hypot(pos[:, 0], pos[:, 1]), 0.7, rtol=1e-15)


def test_from_spacing_half_wavelength():
    d = SPEED_OF_LIGHT / (2 * 30e9)
    g = ArrayGeometry.from_spacing(256, d)
    assert g.radius == pytest.approx(256 * d / (2 * math.pi), rel=1e-15)
    assert g.radius == pytest.approx(0.20358, abs=1e-5)
    assert g.spacing == pytest.approx(d, rel=1e-15)


@pytest.mark.parametrize("n, radius", [(2, 1.0), (3.5, 1.0), (8, 0.0), (8, -1.0), (8, math.inf)])
def test_invalid_geometry(n, radius):
    with pytest.raises(ValidationError):
        ArrayGeometry(n, radius)


def test_angle_is_wrapped():
    assert TargetLocation(5.0, -math.pi / 2).angle == pytest.approx(3 * math.pi / 2)


@pytest.mark.parametrize("r", [0.5, 0.4, 0.5 + MIN_DISTANCE / 2])
def test_target_inside_or_on_circle_rejected(r):
    with pytest.raises(ValidationError):
        check_near_field(ArrayGeometry(8, 0.5), TargetLocation(r, 0.0))


def test_distances_match_cartesian():
    g, t = ArrayGeometry(32, 0.5), TargetLocation(3.0, 1.1)
    ref = np.linalg.norm(antenna_positions(g) - t.position, axis=1)
    assert_allclose(propagation_distances(g, t), ref, rtol=1e-13)


def test_distance_to_aligned_antenna_is_exact():
    # theta equal to psi_N = 2 pi (wrapped to 0) gives r - R with no cancellation
    g, t = ArrayGeometry(8, 1.0), TargetLocation(1.0 + 1e-6, 0.0)
    assert propagation_distances(g, t)[-1] == pytest.approx(1e-6, rel=1e-9)


def test_derivatives_match_finite_differences():
    g, t = ArrayGeometry(12, 0.4), TargetLocation(2.5, 0.7)
    d_theta, d_range = distance_derivatives(g, t)
    h = 1e-6
    num_theta = (propagation_distances(g, TargetLocation(2.5, 0.7 + h))
                 - propagation_distances(g, TargetLocation(2.5, 0.7 - h))) / (2 * h)
    num_range = (propagation_distances(g, TargetLocation(2.5 + h, 0.7))
                 - propagation_distances(g, TargetLocation(2.5 - h, 0.7))) / (2 * h)
    assert_allclose(d_theta, num_theta, atol=1e-8)
    assert_allclose(d_range, num_range, atol=1e-8)


@given(n=st.integers(3, 512), R=st.floats(0.01, 10), ratio=st.floats(1.001, 1e6),
       theta=st.floats(-10, 10))
def test_pythagorean_identity(n, R, ratio, theta):
    g, t = ArrayGeometry(n, R), TargetLocation(R * ratio, theta)
    d_theta, d_range = distance_derivatives(g, t)
    assert_allclose((d_theta / t.range) ** 2 + d_range**2, 1.0, atol=1e-12)


@given(n=st.integers(3, 256), ratio=st.floats(1.01, 1e4), theta=st.floats(0, 2 * math.pi))
def test_distances_bounded_by_triangle_inequality(n, ratio, theta):
    g, t = ArrayGeometry(n, 1.0), TargetLocation(ratio, theta)
    dist = propagation_distances(g, t)
    assert np.all(dist >= (ratio - 1) * (1 - 1e-12))
    assert np.all(dist <= (ratio + 1) * (1 + 1e-12))

import math

import numpy as np
import pytest
from hypothesis import given, settings
from numpy.testing import assert_allclose

from nearfield_crb import (
    CovarianceSpec, FimInnerProducts, TargetLocation, UnidentifiableError, ValidationError, crb_closed, crb_exact,
    crb_from_q, exact_sums, fim_inner_products, q_matrix, sampled_fim_oracle, spectral_moments,
)
from nearfield_crb.crb_exact import array_response, transmit_covariances
from nearfield_crb.validation import sampled_errors, sampled_fixture

from conftest import scenarios


def small(defaults, **kw):
    M = kw.pop("n_subcarriers", 8)
    return defaults.with_(n_antennas=kw.pop("n_antennas", 16), n_subcarriers=M,
                          subcarrier_spacing_hz=defaults.grid.bandwidth_hz / M, **kw)


def test_array_response_unit_modulus(defaults):
    a = array_response(small(defaults))
    assert a.shape == (8, 16)
    assert_allclose(np.abs(a), 1.0, rtol=1e-15)


def test_covariances_have_trace_p(defaults):
    sc = small(defaults, power_per_subcarrier=2.5)
    for cov in (CovarianceSpec.isotropic(), CovarianceSpec.directional(sc.target)):
        R = transmit_covariances(sc, cov)
        assert_allclose(np.trace(R, axis1=1, axis2=2).real, 2.5, rtol=1e-14)


def test_covariance_spec_validation():
    with pytest.raises(ValidationError):
        CovarianceSpec("directional")
    with pytest.raises(ValidationError):
        CovarianceSpec("isotropic", TargetLocation(2.0, 0.0))
    with pytest.raises(ValidationError):
        CovarianceSpec("omni")


def test_inner_products_match_dense_traces(defaults):
    """Compare against explicit tr(G^H G' R) with full matrices."""
    sc = small(defaults, n_antennas=6, n_subcarriers=3, range=1.0)
    from nearfield_crb import distance_derivatives, wavenumbers

    k = wavenumbers(sc.grid)
    d_t, d_r = distance_derivatives(sc.geometry, sc.target)
    a = array_response(sc)
    for cov in (CovarianceSpec.isotropic(), CovarianceSpec.directional(TargetLocation(1.3, 0.4))):
        Rm = transmit_covariances(sc, cov)
        acc = np.zeros(6, dtype=complex)
        for m in range(3):
            A = np.outer(a[m], a[m])
            Gt = -1j * k[m] * (np.diag(d_t) @ A + A @ np.diag(d_t))
            Gr = -1j * k[m] * (np.diag(d_r) @ A + A @ np.diag(d_r))
            tr = lambda X, Y: np.trace(X.conj().T @ Y @ Rm[m])
            acc += [tr(A, A), tr(Gt, Gt), tr(Gr, Gr), tr(Gt, Gr), tr(Gt, A), tr(Gr, A)]
        acc *= sc.grid.n_symbols * sc.budget.gain_magnitude_sq
        ips = fim_inner_products(sc, cov)
        got = [ips.u_norm_sq, ips.u_theta_norm_sq, ips.u_r_norm_sq, ips.cross_theta_r, ips.cross_theta_u,
               ips.cross_r_u]
        assert_allclose(got, acc, rtol=1e-12, atol=1e-12 * abs(acc[1]))


def test_isotropic_inner_products_closed_structure(defaults):
    """Isotropic norms reduce to geometry sums times spectral moments."""
    sc = small(defaults, range=2.0)
    ips = fim_inner_products(sc)
    N, L = sc.geometry.n_antennas, sc.grid.n_symbols
    sums = exact_sums(sc.geometry, sc.target)
    k_sq = (2 * math.pi / 299_792_458.0) ** 2 * spectral_moments(sc.grid).m_tilde
    assert ips.u_norm_sq == pytest.approx(L * sc.grid.n_subcarriers * N, rel=1e-13)
    assert ips.u_theta_norm_sq == pytest.approx(2 * L * k_sq * (sums.u_theta + sums.c_theta**2 / N), rel=1e-12)
    # u_x^H u is purely imaginary: 2j L sum_m k_m c_x (sign fixed by the x^H y convention)
    k_bar = 2 * math.pi / 299_792_458.0 * spectral_moments(sc.grid).m_bar
    assert ips.cross_r_u.imag == pytest.approx(2 * L * k_bar * sums.c_r, rel=1e-12)
    for cross, norm in ((ips.cross_theta_u, ips.u_theta_norm_sq), (ips.cross_r_u, ips.u_r_norm_sq)):
        assert abs(cross.real) <= 1e-12 * math.sqrt(norm * ips.u_norm_sq)


def test_exact_matches_closed_at_defaults(defaults):
    ex, cf = crb_exact(defaults), crb_closed(defaults)
    assert ex.crb_theta == pytest.approx(cf.crb_theta, rel=1e-10)
    assert ex.crb_r == pytest.approx(cf.crb_r, rel=1e-6)


def test_q_matrix_structure(defaults):
    q = q_matrix(fim_inner_products(small(defaults)))
    assert q.det > 0 and q.q11 > 0 and q.q22 > 0
    assert 0 < q.sin_sq_angle <= 1 and 0 < q.sin_sq_range <= 1
    assert_allclose(q.as_array(), q.as_array().T)


def test_crb_is_inverse_of_reduced_fim(defaults):
    sc = small(defaults)
    ips = fim_inner_products(sc)
    q = q_matrix(ips)
    pair = crb_from_q(q, ips, sc.budget.noise_variance)
    inv = sc.budget.noise_variance / 2 * np.linalg.inv(q.as_array())
    assert pair.crb_theta == pytest.approx(inv[0, 0], rel=1e-10)
    assert pair.crb_r == pytest.approx(inv[1, 1], rel=1e-10)


def test_singular_information_raises():
    ips = FimInnerProducts(1.0, 1.0, 1.0, 1.0 + 0j, 0j, 0j)  # u_theta parallel to u_r
    with pytest.raises(UnidentifiableError):
        crb_from_q(q_matrix(ips), ips, 1.0)
    with pytest.raises(UnidentifiableError):
        q_matrix(FimInnerProducts(0.0, 1.0, 1.0, 0j, 0j, 0j))


@settings(max_examples=15, deadline=None)
@given(sc=scenarios(max_antennas=24, max_subcarriers=8))
def test_directional_never_worse(sc):
    iso = crb_exact(sc)
    dire = crb_exact(sc, CovarianceSpec.directional(sc.target))
    assert dire.crb_theta <= iso.crb_theta * (1 + 1e-9)
    assert dire.crb_r <= iso.crb_r * (1 + 1e-9)


def test_directional_theta_gain_is_two_over_n(defaults):
    sc = small(defaults, range=3.0)
    iso, dire = crb_exact(sc), crb_exact(sc, CovarianceSpec.directional(sc.target))
    assert dire.crb_theta / iso.crb_theta == pytest.approx(2 / sc.geometry.n_antennas, rel=1e-6)


def test_gain_phase_does_not_matter(defaults):
    sc = small(defaults, n_antennas=4, n_subcarriers=2, n_symbols=8)
    a = sampled_fim_oracle(sc, seed=3).as_dict()
    b = sampled_fim_oracle(sc, seed=3, gain=np.exp(0.7j)).as_dict()
    for key in a:
        assert a[key] == pytest.approx(b[key], rel=1e-12)


def test_sampled_oracle_is_seeded(defaults):
    sc = small(defaults, n_antennas=4, n_subcarriers=2, n_symbols=8)
    assert sampled_fim_oracle(sc, seed=5) == sampled_fim_oracle(sc, seed=5)
    assert sampled_fim_oracle(sc, seed=5) != sampled_fim_oracle(sc, seed=6)


def test_sampled_oracle_size_guard(defaults):
    with pytest.raises(ValidationError):
        sampled_fim_oracle(defaults)


def test_sampled_directional_is_exact():
    sc = sampled_fixture()
    errs = sampled_errors(sc, CovarianceSpec.directional(sc.target), range(3))
    assert max(errs.values()) < 1e-12


def test_sampled_isotropic_converges():
    sc = sampled_fixture()
    errs = sampled_errors(sc, CovarianceSpec.isotropic(), range(20))
    assert max(errs.values()) < 0.05


@pytest.mark.parametrize("kind", ["isotropic", "directional"])
def test_matches_full_fim_with_gain_parameters(defaults, kind):
    """Inverting the 4x4 FIM over (theta, r, Re beta, Im beta) gives the projected CRBs."""
    sc = small(defaults, range=2.0, angle=0.4)
    cov = CovarianceSpec.isotropic() if kind == "isotropic" else CovarianceSpec.directional(sc.target)
    ips = fim_inner_products(sc, cov)
    # unit real gain: d u / d Re(beta) = u, d u / d Im(beta) = j u
    tu, ru = ips.cross_theta_u, ips.cross_r_u
    H = np.array([
        [ips.u_theta_norm_sq, ips.cross_theta_r, tu, 1j * tu],
        [np.conj(ips.cross_theta_r), ips.u_r_norm_sq, ru, 1j * ru],
        [np.conj(tu), np.conj(ru), ips.u_norm_sq, 1j * ips.u_norm_sq],
        [-1j * np.conj(tu), -1j * np.conj(ru), -1j * ips.u_norm_sq, ips.u_norm_sq],
    ])
    fim = 2 / sc.budget.noise_variance * H.real
    crb = np.linalg.inv(fim)
    pair = crb_exact(sc, cov)
    assert pair.crb_theta == pytest.approx(crb[0, 0], rel=1e-8)
    assert pair.crb_r == pytest.approx(crb[1, 1], rel=1e-8)

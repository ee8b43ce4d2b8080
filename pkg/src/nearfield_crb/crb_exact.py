"""Exact CRBs from the stacked-observation Fisher information.

The observation on subcarrier m is Y_m = beta * A_m X_m + Z_m with
A_m = a_m a_m^T and a_m = exp(-j k_m r_n). Every inner product between
stacked vectors vec(beta G_m X_m) is evaluated as

    |beta|^2 L sum_m tr(G_m^H G'_m R_m),

i.e. (1/L) X_m X_m^H is replaced by the transmit covariance R_m. The sampled
oracle keeps explicit X_m instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .crb_closed import CrbPair
from .errors import UnidentifiableError, ValidationError
from .geometry import TargetLocation, check_near_field, distance_derivatives, propagation_distances
from .scenario import Scenario
from .waveform import wavenumbers

# det(Q) at or below this (absolute) is treated as unidentifiable
DET_Q_FLOOR = 1e-30
SAMPLED_MAX_ELEMENTS = 2**20
# complex entries per vectorised block of N x N subcarrier matrices
_BLOCK_ELEMENTS = 2**20


@dataclass(frozen=True)
class CovarianceSpec:
    kind: str = "isotropic"
    steering: TargetLocation | None = None

    def __post_init__(self):
        if self.kind == "isotropic":
            if self.steering is not None:
                raise ValidationError("isotropic covariance takes no steering target")
        elif self.kind == "directional":
            if self.steering is None:
                raise ValidationError("directional covariance needs a steering target")
        else:
            raise ValidationError(f"unknown covariance kind {self.kind!r}; expected isotropic or directional")

    @classmethod
    def isotropic(cls) -> "CovarianceSpec":
        return cls("isotropic")

    @classmethod
    def directional(cls, steering: TargetLocation) -> "CovarianceSpec":
        return cls("directional", steering)


@dataclass(frozen=True)
class FimInnerProducts:
    u_norm_sq: float
    u_theta_norm_sq: float
    u_r_norm_sq: float
    cross_theta_r: complex  # u_theta^H u_r
    cross_theta_u: complex  # u_theta^H u
    cross_r_u: complex  # u_r^H u

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


@dataclass(frozen=True)
class QMatrix:
    q11: float
    q12: float
    q22: float
    sin_sq_angle: float  # sin^2 Omega, alignment of u_theta with u
    sin_sq_range: float  # sin^2 Theta, alignment of u_r with u

    @property
    def det(self) -> float:
        return self.q11 * self.q22 - self.q12 * self.q12

    def as_array(self) -> np.ndarray:
        return np.array([[self.q11, self.q12], [self.q12, self.q22]])


def array_response(sc: Scenario, target: TargetLocation | None = None) -> np.ndarray:
    """(M, N) near-field responses a_m = exp(-j k_m r_n), at ``target`` or the scenario target."""
    target = sc.target if target is None else target
    dist = propagation_distances(sc.geometry, target)
    return np.exp(-1j * np.outer(wavenumbers(sc.grid), dist))


def transmit_covariances(sc: Scenario, cov: CovarianceSpec) -> np.ndarray:
    """(M, N, N) stack of R_m, each with trace P."""
    N, M = sc.geometry.n_antennas, sc.grid.n_subcarriers
    P = sc.budget.power_per_subcarrier
    if cov.kind == "isotropic":
        return np.broadcast_to(P / N * np.eye(N), (M, N, N)).copy()
    w = np.conj(array_response(sc, cov.steering))
    return P / N * w[:, :, None] * np.conj(w)[:, None, :]


def _beam_weights(sc: Scenario, cov: CovarianceSpec):
    # R_m = (P/N) w_m w_m^H; None stands for w_m = identity
    if cov.kind == "isotropic":
        return None
    check_near_field(sc.geometry, cov.steering)
    return np.conj(array_response(sc, cov.steering))


def fim_inner_products(sc: Scenario, cov: CovarianceSpec = CovarianceSpec()) -> FimInnerProducts:
    N, M = sc.geometry.n_antennas, sc.grid.n_subcarriers
    k = wavenumbers(sc.grid)
    d_theta, d_range = distance_derivatives(sc.geometry, sc.target)
    resp = array_response(sc)
    weights = _beam_weights(sc, cov)
    pair_theta = d_theta[:, None] + d_theta[None, :]
    pair_range = d_range[:, None] + d_range[None, :]

    per_m = np.empty((6, M), dtype=complex)
    block = max(1, _BLOCK_ELEMENTS // (N * N))
    for start in range(0, M, block):
        sl = slice(start, min(start + block, M))
        a = resp[sl]
        A = a[:, :, None] * a[:, None, :]
        kk = k[sl, None, None]
        G_theta = -1j * kk * pair_theta * A
        G_range = -1j * kk * pair_range * A
        if weights is not None:
            w = weights[sl, :, None]
            A, G_theta, G_range = (np.matmul(X, w)[..., 0] for X in (A, G_theta, G_range))
        # tr(X^H Y) = vdot(X, Y); isotropic R_m = (P/N) I, directional folded in above
        for j, m in enumerate(range(sl.start, sl.stop)):
            a_m, t_m, r_m = A[j].ravel(), G_theta[j].ravel(), G_range[j].ravel()
            per_m[:, m] = [np.vdot(a_m, a_m), np.vdot(t_m, t_m), np.vdot(r_m, r_m),
                           np.vdot(t_m, r_m), np.vdot(t_m, a_m), np.vdot(r_m, a_m)]

    b = sc.budget
    scale = b.gain_magnitude_sq * sc.grid.n_symbols * b.power_per_subcarrier / N
    # numpy's contiguous sum is pairwise, and the order is fixed
    totals = scale * per_m.sum(axis=1)
    return FimInnerProducts(
        u_norm_sq=float(totals[0].real),
        u_theta_norm_sq=float(totals[1].real),
        u_r_norm_sq=float(totals[2].real),
        cross_theta_r=complex(totals[3]),
        cross_theta_u=complex(totals[4]),
        cross_r_u=complex(totals[5]),
    )


def q_matrix(ips: FimInnerProducts) -> QMatrix:
    """Reduced 2x2 information matrix after projecting out the unknown gain."""
    u2 = ips.u_norm_sq
    if not u2 > 0:
        raise UnidentifiableError("zero signal energy: ||u||^2 = 0")
    lost_theta = abs(ips.cross_theta_u) ** 2 / u2
    lost_range = abs(ips.cross_r_u) ** 2 / u2
    q11 = ips.u_theta_norm_sq - lost_theta
    q22 = ips.u_r_norm_sq - lost_range
    # u^H u_theta = conj(u_theta^H u)
    q12 = (ips.cross_theta_r - np.conj(ips.cross_theta_u) * ips.cross_r_u / u2).real
    sin_sq_angle = q11 / ips.u_theta_norm_sq if ips.u_theta_norm_sq > 0 else 0.0
    sin_sq_range = q22 / ips.u_r_norm_sq if ips.u_r_norm_sq > 0 else 0.0
    return QMatrix(float(q11), float(q12), float(q22), float(sin_sq_angle), float(sin_sq_range))


def crb_from_q(q: QMatrix, ips: FimInnerProducts, noise_variance: float) -> CrbPair:
    det = q.det
    if not det > DET_Q_FLOOR or q.q11 <= 0 or q.q22 <= 0:
        raise UnidentifiableError(f"reduced Fisher matrix is singular (det Q = {det!r})")
    # ||u_r||^2 sin^2 Theta and ||u_theta||^2 sin^2 Omega are Q22 and Q11
    return CrbPair(
        crb_theta=noise_variance * q.q22 / (2 * det),
        crb_r=noise_variance * q.q11 / (2 * det),
    )


def crb_exact(sc: Scenario, cov: CovarianceSpec = CovarianceSpec()) -> CrbPair:
    ips = fim_inner_products(sc, cov)
    return crb_from_q(q_matrix(ips), ips, sc.budget.noise_variance)


def _draw_symbols(rng, sc, weights, m):
    N, L = sc.geometry.n_antennas, sc.grid.n_symbols
    P = sc.budget.power_per_subcarrier
    if weights is None:
        z = rng.standard_normal((N, L)) + 1j * rng.standard_normal((N, L))
        return math.sqrt(P / (2 * N)) * z
    # unit-modulus symbols realise the rank-one covariance exactly
    symbols = np.exp(2j * np.pi * rng.random(L))
    return math.sqrt(P / N) * np.outer(weights[m], symbols)


def sampled_fim_oracle(sc: Scenario, cov: CovarianceSpec = CovarianceSpec(), seed: int = 0,
                       gain: complex | None = None) -> FimInnerProducts:
    """Inner products of explicitly stacked vec(beta G_m X_m) blocks for one random draw of X_m.

    ``gain`` overrides beta (default sqrt(|beta|^2) from the budget).
    """
    N, M, L = sc.geometry.n_antennas, sc.grid.n_subcarriers, sc.grid.n_symbols
    if N * M * L > SAMPLED_MAX_ELEMENTS:
        raise ValidationError(f"N*M*L = {N * M * L} exceeds the sampled-oracle limit {SAMPLED_MAX_ELEMENTS}")
    beta = math.sqrt(sc.budget.gain_magnitude_sq) if gain is None else gain
    rng = np.random.default_rng(seed)
    k = wavenumbers(sc.grid)
    d_theta, d_range = distance_derivatives(sc.geometry, sc.target)
    resp = array_response(sc)
    weights = _beam_weights(sc, cov)

    per_m = np.empty((6, M), dtype=complex)
    for m in range(M):
        X = _draw_symbols(rng, sc, weights, m)
        a = resp[m]
        A = np.outer(a, a)
        Th = np.diag(d_theta)
        Up = np.diag(d_range)
        G_theta = -1j * k[m] * (Th @ A + A @ Th)
        G_range = -1j * k[m] * (Up @ A + A @ Up)
        u = (beta * (A @ X)).ravel(order="F")
        u_t = (beta * (G_theta @ X)).ravel(order="F")
        u_r = (beta * (G_range @ X)).ravel(order="F")
        per_m[:, m] = [np.vdot(u, u), np.vdot(u_t, u_t), np.vdot(u_r, u_r),
                       np.vdot(u_t, u_r), np.vdot(u_t, u), np.vdot(u_r, u)]
    totals = per_m.sum(axis=1)
    return FimInnerProducts(
        u_norm_sq=float(totals[0].real),
        u_theta_norm_sq=float(totals[1].real),
        u_r_norm_sq=float(totals[2].real),
        cross_theta_r=complex(totals[3]),
        cross_theta_u=complex(totals[4]),
        cross_r_u=complex(totals[5]),
    )

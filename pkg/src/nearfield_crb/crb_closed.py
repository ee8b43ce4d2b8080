"""Closed-form CRBs for a UCA under isotropic OFDM illumination, and their limits."""
from __future__ import annotations

from dataclasses import dataclass

from .scenario import Scenario
from .specfun import DEFAULT_SETTINGS, QuadratureSettings, phi, phi_complement, xi


class InfiniteCrb:
    """Marker for an unbounded CRB (single carrier, far field).

    Deliberately not a float: arithmetic on it raises instead of silently
    propagating ``inf``/``nan`` through a sweep.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITE_CRB"

    def __str__(self):
        return "inf"

    def __reduce__(self):
        return (InfiniteCrb, ())


INFINITE_CRB = InfiniteCrb()


@dataclass(frozen=True)
class CrbPair:
    crb_theta: float  # rad^2
    crb_r: float  # m^2


def _observations(sc: Scenario) -> float:
    return sc.budget.rho * sc.grid.n_symbols * sc.geometry.n_antennas * sc.grid.n_subcarriers


def _excess_bandwidth_sq(sc: Scenario) -> float:
    # B^2 - df^2 = df^2 (M^2 - 1), exact zero at M = 1
    M, df = sc.grid.n_subcarriers, sc.grid.subcarrier_spacing_hz
    return df * df * (M * M - 1)


def crb_theta_closed(sc: Scenario) -> float:
    R, fc = sc.geometry.radius, sc.grid.carrier_hz
    return 6 / (_observations(sc) * R * R * (12 * fc * fc + _excess_bandwidth_sq(sc)))


def crb_r_closed(sc: Scenario, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    s, fc = sc.aperture_ratio, sc.grid.carrier_hz
    bracket = 12 * fc * fc * phi(s, settings) + _excess_bandwidth_sq(sc) * phi_complement(s, settings)
    return 3 / (_observations(sc) * bracket)


def crb_r_closed_via_xi(sc: Scenario, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Same bound as :func:`crb_r_closed`, routed through Xi(R/r, B/f_c, df/f_c)."""
    fc = sc.grid.carrier_hz
    q = sc.grid.bandwidth_hz / fc
    p = sc.grid.subcarrier_spacing_hz / fc
    return 3 / (_observations(sc) * fc * fc * xi(sc.aperture_ratio, q, p, settings))


def crb_r_farfield(sc: Scenario) -> float | InfiniteCrb:
    """r -> infinity limit; unbounded for a single subcarrier."""
    excess = _excess_bandwidth_sq(sc)
    if excess == 0:
        return INFINITE_CRB
    return 3 / (2 * _observations(sc) * excess)


def crb_r_single_carrier(sc: Scenario, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """M -> 1 limit. Uses L, N, f_c and R/r from ``sc``; its subcarrier count is ignored."""
    rho, L, N = sc.budget.rho, sc.grid.n_symbols, sc.geometry.n_antennas
    fc = sc.grid.carrier_hz
    return 1 / (4 * rho * L * N * fc * fc * phi(sc.aperture_ratio, settings))


def crb_closed(sc: Scenario, settings: QuadratureSettings = DEFAULT_SETTINGS) -> CrbPair:
    return CrbPair(crb_theta_closed(sc), crb_r_closed(sc, settings))

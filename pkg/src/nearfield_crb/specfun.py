"""The range-information integral K(alpha) and the derived aperture factors.

K(alpha) = (1/2pi) * int_0^{2pi} (alpha - cos x) / sqrt(1 - 2 alpha cos x + alpha^2) dx

Internally everything is expressed through the deficit kappa = 1 - K, whose
integrand can be written without cancellation:

    1 - f(x) = s^2 sin^2 x / (sqrt(D) * (sqrt(D) + 1 - s cos x)),
    D = 1 - 2 s cos x + s^2,  s = 1 / alpha.

The integrand is even about x = pi, so only [0, pi] is integrated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError

# Below this alpha the integrand is too peaked at x = 0 for the periodic
# trapezoid rule and adaptive Gauss-Kronrod is used instead.
TRAPEZOID_MIN_ALPHA = 1.1

# Phi uses its power series for s below this; the quadrature route loses
# about log10(16/s^2) digits to cancellation.
PHI_SERIES_MAX_RATIO = 0.25

_GK15_NODES = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_GK15_WEIGHTS = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_G7_WEIGHTS = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-10
    max_subdivisions: int = 20

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-3:
            raise DomainError(f"rel_tol must lie in (0, 1e-3], got {self.rel_tol!r}")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 4:
            raise DomainError(f"max_subdivisions must be an integer >= 4, got {self.max_subdivisions!r}")


DEFAULT_SETTINGS = QuadratureSettings()


def _deficit_integrand(x, s):
    sin_half = np.sin(x / 2)
    root_d = np.sqrt((1 - s) ** 2 + 4 * s * sin_half**2)
    # 1 - s cos x, written so it stays accurate for s near 1 and x near 0
    t = (1 - s) + 2 * s * sin_half**2
    return s**2 * np.sin(x) ** 2 / (root_d * (root_d + t))


def trapezoid_deficit(s: float, n_panels: int) -> float:
    """Periodic trapezoid estimate of 1 - K(1/s) with ``n_panels`` panels on [0, pi]."""
    x = np.linspace(0.0, np.pi, n_panels + 1)
    y = _deficit_integrand(x, s)
    return float((y[0] / 2 + y[1:-1].sum() + y[-1] / 2) / n_panels)


def _trapezoid(s, settings):
    n = 8
    prev = trapezoid_deficit(s, n)
    for _ in range(settings.max_subdivisions):
        n *= 2
        cur = trapezoid_deficit(s, n)
        if abs(cur - prev) <= settings.rel_tol * abs(cur):
            return cur
        prev = cur
    raise ConvergenceError(f"trapezoid rule for K did not converge at s={s!r} with {n} panels")


def _gk15(f, a, b):
    half = (b - a) / 2
    mid = (a + b) / 2
    nodes = np.concatenate([mid - half * _GK15_NODES[:-1], [mid], mid + half * _GK15_NODES[-2::-1]])
    y = f(nodes)
    left, centre, right = y[:7], y[7], y[8:][::-1]
    pair = left + right
    kronrod = half * (np.dot(_GK15_WEIGHTS[:-1], pair) + _GK15_WEIGHTS[-1] * centre)
    gauss = half * (np.dot(_G7_WEIGHTS[:-1], pair[1::2]) + _G7_WEIGHTS[-1] * centre)
    return kronrod, abs(kronrod - gauss)


def adaptive_integrate(f, a: float, b: float, settings: QuadratureSettings = DEFAULT_SETTINGS,
                       breakpoints=()) -> float:
    """Globally adaptive Gauss-Kronrod (7/15) integration of a vectorised ``f`` on [a, b].

    The interval with the largest error estimate is bisected until the summed
    estimate falls below ``rel_tol`` times the integral. An interval that would
    need more than ``max_subdivisions`` halvings raises ConvergenceError.
    ``breakpoints`` inside (a, b) seed the initial partition.
    """
    edges = [a] + sorted(x for x in breakpoints if a < x < b) + [b]
    panels = [(e, v, lo, hi, 0) for lo, hi in zip(edges, edges[1:]) for v, e in [_gk15(f, lo, hi)]]
    while True:
        total = math.fsum(p[1] for p in panels)
        total_err = math.fsum(p[0] for p in panels)
        if total_err <= settings.rel_tol * abs(total) or total_err < 1e-300:
            return total
        worst = max(range(len(panels)), key=lambda i: panels[i][0])
        err, _, lo, hi, depth = panels.pop(worst)
        if depth >= settings.max_subdivisions:
            raise ConvergenceError(
                f"adaptive quadrature exceeded {settings.max_subdivisions} subdivisions on [{lo}, {hi}]"
            )
        mid = (lo + hi) / 2
        for sub_lo, sub_hi in ((lo, mid), (mid, hi)):
            v, e = _gk15(f, sub_lo, sub_hi)
            panels.append((e, v, sub_lo, sub_hi, depth + 1))


@lru_cache(maxsize=4096)
def _deficit_cached(alpha: float, rel_tol: float, max_subdivisions: int) -> float:
    settings = QuadratureSettings(rel_tol, max_subdivisions)
    if math.isinf(alpha):
        return 0.0
    s = 1.0 / alpha
    if alpha >= TRAPEZOID_MIN_ALPHA:
        return _trapezoid(s, settings)
    # near alpha = 1 the integrand peaks in a layer of width ~ 1 - s at x = 0
    width = 1.0 - s
    marks = width * 2.0 ** np.arange(0, 64) if width > 0 else ()
    return adaptive_integrate(lambda x: _deficit_integrand(x, s), 0.0, math.pi, settings, marks) / math.pi


def _check_alpha(alpha):
    if math.isnan(alpha) or alpha < 1:
        raise DomainError(f"K(alpha) requires alpha >= 1, got {alpha!r}")


def k_deficit(alpha: float, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """1 - K(alpha), computed without cancellation."""
    _check_alpha(alpha)
    return _deficit_cached(float(alpha), settings.rel_tol, settings.max_subdivisions)


def k_alpha(alpha: float, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """K(alpha) for alpha = r/R >= 1. K(1) = 2/pi and K -> 1 as alpha -> inf."""
    return 1.0 - k_deficit(alpha, settings)


@lru_cache(maxsize=1)
def _deficit_series_coefficients(n_terms=200):
    # 1 - K(1/s) = sum_k b_k s^(2k) from the Legendre generating function;
    # a_n = mean of P_n(cos x) over a period = (C(n, n/2) / 2^n)^2 for even n.
    a = [1.0]
    for k in range(1, n_terms + 1):
        ratio = (2 * k - 1) / (2 * k)
        a.append(a[-1] * ratio * ratio)
    return np.array([(2 * k - 1) * (a[k - 1] - a[k]) / (4 * k - 1) for k in range(1, n_terms + 1)])


def _phi_series(s):
    b = _deficit_series_coefficients()
    powers = (s * s) ** np.arange(1, len(b) + 1)
    terms = b * powers
    tail = math.fsum(terms[1:])  # kappa - s^2/4
    kappa = s * s / 4 + tail
    return 2 * tail - kappa * kappa


def phi(aperture_ratio: float, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Single-carrier range factor Phi(s) = 1 - s^2/2 - K(1/s)^2 for s = R/r in (0, 1].

    Phi(1) = 1/2 - 4/pi^2 and Phi(s) ~ s^4/32 as s -> 0.
    """
    s = float(aperture_ratio)
    if not 0 < s <= 1:
        raise DomainError(f"aperture ratio R/r must lie in (0, 1], got {aperture_ratio!r}")
    if s <= PHI_SERIES_MAX_RATIO:
        return _phi_series(s)
    kappa = k_deficit(1.0 / s, settings)
    return 2 * kappa - kappa * kappa - s * s / 2


def phi_complement(aperture_ratio: float, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """1 - s^2/2 + K(1/s)^2, the bandwidth-weighted companion of Phi."""
    s = float(aperture_ratio)
    return 2 - s * s - phi(s, settings)


def xi(aperture_ratio: float, fractional_bandwidth: float, fractional_spacing: float = 0.0,
       settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Wideband range factor Xi(R/r, B/f_c) with the exact (B^2 - df^2)/f_c^2 weight.

    Pass ``fractional_spacing=0`` for the many-subcarrier approximation.
    """
    s = float(aperture_ratio)
    if not 0 < s < 1:
        raise DomainError(f"aperture ratio R/r must lie in (0, 1), got {aperture_ratio!r}")
    q, p = float(fractional_bandwidth), float(fractional_spacing)
    if not 0 <= p <= q:
        raise DomainError(f"need 0 <= df/f_c <= B/f_c, got df/f_c={p!r}, B/f_c={q!r}")
    ph = phi(s, settings)
    return 12 * ph + (q * q - p * p) * (2 - s * s - ph)

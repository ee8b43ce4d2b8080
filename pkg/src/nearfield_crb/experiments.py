"""Parameter sweeps and the tabulated figure families.

Rows are independent and may run on a thread pool; results are always
assembled in sweep order, so output does not depend on the thread count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import __version__
from .crb_closed import INFINITE_CRB, crb_r_closed, crb_r_farfield, crb_r_single_carrier, crb_theta_closed
from .crb_exact import CovarianceSpec, crb_exact
from .errors import NearFieldError, UnidentifiableError, ValidationError
from .scenario import Scenario, default_scenario
from .specfun import DEFAULT_SETTINGS, QuadratureSettings, phi, xi
from .waveform import SPEED_OF_LIGHT

THREADS_ENV = "NEARFIELD_CRB_THREADS"
DEFAULT_WORK_BUDGET = 2**16  # max N*M for exact-path columns

PATHS = ("closed", "exact", "farfield", "single-carrier")
COVARIANCES = ("isotropic", "directional")
COUPLINGS = {
    "n_subcarriers": ("fixed-bandwidth", "fixed-spacing"),
    "n_antennas": ("fixed-aperture", "fixed-antenna-spacing"),
    "target_range": ("none",),
    "target_angle": ("none",),
    "radius": ("none",),
    "bandwidth": ("none",),
    "snr_db": ("none",),
}
SWEEP_PARAMS = tuple(COUPLINGS)
INTEGER_PARAMS = ("n_subcarriers", "n_antennas")

FIGURES = ("fig2", "fig3", "fig4a", "fig4b", "fig5a", "fig5b", "fig6")
FIG2_FRACTIONAL_BANDWIDTHS = (0.01, 0.05, 0.1, 0.3, 0.5)
FIG6_RADII = (0.5, 1.0)
FIG6_BANDWIDTHS = (1e7, 1e8, 1e9)


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)
    scenarios: list[Scenario] | None = None

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row has {len(row)} cells, table has {len(self.columns)} columns")

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


@dataclass(frozen=True)
class SweepSpec:
    base: Scenario
    param: str
    values: tuple
    coupling: str = "none"
    paths: tuple = ("closed", "exact")
    covariances: tuple = ("isotropic",)
    work_budget: int = DEFAULT_WORK_BUDGET
    seed: int = 0
    settings: QuadratureSettings = DEFAULT_SETTINGS

    def __post_init__(self):
        if self.param not in COUPLINGS:
            raise ValidationError(f"unknown sweep parameter {self.param!r}; valid: {', '.join(SWEEP_PARAMS)}")
        if self.coupling not in COUPLINGS[self.param]:
            raise ValidationError(
                f"coupling {self.coupling!r} does not apply to {self.param}; valid: {', '.join(COUPLINGS[self.param])}"
            )
        if not self.paths:
            raise ValidationError("at least one computation path is required")
        bad = [p for p in self.paths if p not in PATHS]
        if bad:
            raise ValidationError(f"unknown path(s) {bad}; valid: {', '.join(PATHS)}")
        bad = [c for c in self.covariances if c not in COVARIANCES]
        if bad or not self.covariances:
            raise ValidationError(f"covariances must be a non-empty subset of {COVARIANCES}, got {self.covariances}")
        values = tuple(self.values)
        if not values:
            raise ValidationError("sweep needs at least one value")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValidationError("swept values must be strictly increasing")
        object.__setattr__(self, "values", values)


def resolve_threads(threads: int | None = None) -> int:
    """Explicit count, else $NEARFIELD_CRB_THREADS, else the CPU count."""
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env is None or env == "":
            return os.cpu_count() or 1
        try:
            threads = int(env)
        except ValueError:
            raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
    if threads < 1:
        raise ValidationError(f"thread count must be positive, got {threads}")
    return threads


def _ordered_map(fn, items, threads):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def scenario_for(base: Scenario, param: str, value, coupling: str = "none") -> Scenario:
    """Apply one swept value to ``base`` under a coupling rule."""
    geom, grid = base.geometry, base.grid
    if param == "n_subcarriers":
        if coupling == "fixed-bandwidth":
            return base.with_(n_subcarriers=int(value), subcarrier_spacing_hz=grid.bandwidth_hz / int(value))
        return base.with_(n_subcarriers=int(value))
    if param == "n_antennas":
        if coupling == "fixed-antenna-spacing":
            return base.with_(n_antennas=int(value), radius=int(value) * geom.spacing / (2 * math.pi))
        return base.with_(n_antennas=int(value))
    if param == "target_range":
        return base.with_(range=float(value))
    if param == "target_angle":
        return base.with_(angle=float(value))
    if param == "radius":
        return base.with_(radius=float(value))
    if param == "bandwidth":
        return base.with_(subcarrier_spacing_hz=float(value) / grid.n_subcarriers)
    if param == "snr_db":
        b = base.budget
        noise = b.gain_magnitude_sq * b.power_per_subcarrier * 10 ** (-float(value) / 10)
        return base.with_(noise_variance=noise)
    raise ValidationError(f"unknown sweep parameter {param!r}")


def _exact_or_inf(sc, cov):
    try:
        return crb_exact(sc, cov)
    except UnidentifiableError:
        return None


def path_columns(paths, covariances) -> list[str]:
    cols = []
    if "closed" in paths:
        cols += ["crb_theta_closed_rad2", "crb_r_closed_m2"]
    if "exact" in paths:
        for kind in covariances:
            cols += [f"crb_theta_exact_{kind}_rad2", f"crb_r_exact_{kind}_m2"]
    if "farfield" in paths:
        cols.append("crb_r_farfield_m2")
    if "single-carrier" in paths:
        cols.append("crb_r_single_carrier_m2")
    return cols


def evaluate_paths(sc: Scenario, paths, covariances, work_budget=DEFAULT_WORK_BUDGET,
                   settings: QuadratureSettings = DEFAULT_SETTINGS) -> list:
    """Values for :func:`path_columns`; None marks a skipped exact column, INFINITE_CRB an unbounded one."""
    out = []
    if "closed" in paths:
        out += [crb_theta_closed(sc), crb_r_closed(sc, settings)]
    if "exact" in paths:
        within_budget = sc.geometry.n_antennas * sc.grid.n_subcarriers <= work_budget
        for kind in covariances:
            if not within_budget:
                out += [None, None]
                continue
            cov = CovarianceSpec.isotropic() if kind == "isotropic" else CovarianceSpec.directional(sc.target)
            pair = _exact_or_inf(sc, cov)
            out += [INFINITE_CRB, INFINITE_CRB] if pair is None else [pair.crb_theta, pair.crb_r]
    if "farfield" in paths:
        out.append(crb_r_farfield(sc))
    if "single-carrier" in paths:
        out.append(crb_r_single_carrier(sc, settings))
    return out


def run_sweep(spec: SweepSpec, threads: int | None = None) -> ResultTable:
    scenarios = []
    for value in spec.values:
        try:
            scenarios.append(scenario_for(spec.base, spec.param, value, spec.coupling))
        except NearFieldError as exc:
            raise ValidationError(f"{spec.param}={value!r}: {exc}") from exc

    def row(sc):
        return evaluate_paths(sc, spec.paths, spec.covariances, spec.work_budget, spec.settings)

    values = _ordered_map(row, scenarios, resolve_threads(threads))
    table = ResultTable(
        columns=[spec.param] + path_columns(spec.paths, spec.covariances),
        rows=[[v] + r for v, r in zip(spec.values, values)],
        metadata={
            "artifact_version": __version__,
            "param": spec.param,
            "coupling": spec.coupling,
            "paths": ",".join(spec.paths),
            "covariances": ",".join(spec.covariances),
            "work_budget": str(spec.work_budget),
            "seed": str(spec.seed),
            "rel_tol": repr(spec.settings.rel_tol),
        },
        scenarios=scenarios,
    )
    return table


def log_grid(lo: float, hi: float, per_decade: int = 25, integer: bool = False) -> np.ndarray:
    """Log-spaced points from lo to hi inclusive; rounded and de-duplicated when ``integer``."""
    n = max(2, int(round(per_decade * math.log10(hi / lo))) + 1)
    pts = np.logspace(math.log10(lo), math.log10(hi), n)
    if integer:
        pts = np.unique(np.round(pts).astype(int))
    return pts


def ratio_grid() -> np.ndarray:
    return np.linspace(0.01, 0.99, 50)


def _figure2(settings):
    s_grid = ratio_grid()
    cols = ["ratio_R_over_r"] + [f"xi_q_{q:g}" for q in FIG2_FRACTIONAL_BANDWIDTHS]
    rows = [[float(s)] + [xi(s, q, 0.0, settings) for q in FIG2_FRACTIONAL_BANDWIDTHS] for s in s_grid]
    return ResultTable(cols, rows, {"fractional_spacing": "0"})


def _figure3(settings):
    rows = [[float(s), phi(s, settings)] for s in ratio_grid()]
    return ResultTable(["ratio_R_over_r", "phi"], rows)


FIG4_BANDWIDTH = 500e6
FIG4_SPACING = 1e6
FIG4_MAX_SUBCARRIERS = 10**4.5
FIG5_MAX_ANTENNAS = 1000


def _paired_sweep(base, param, grid, couplings, threads, settings):
    """Long-format table: one row per (coupling, value), both covariances."""
    rows, scenarios = [], []
    for coupling, coupled_base in couplings:
        spec = SweepSpec(coupled_base, param, tuple(int(v) for v in grid), coupling,
                         paths=("closed", "exact"), covariances=COVARIANCES, settings=settings)
        table = run_sweep(spec, threads)
        for sc, row in zip(table.scenarios, table.rows):
            rows.append([coupling] + row)
            scenarios.append(sc)
    return rows, scenarios


@lru_cache(maxsize=2)
def _figure4_full(threads, settings):
    base = default_scenario()
    grid = log_grid(1, FIG4_MAX_SUBCARRIERS, integer=True)
    couplings = [
        ("fixed-bandwidth", base.with_(n_subcarriers=1, subcarrier_spacing_hz=FIG4_BANDWIDTH)),
        ("fixed-spacing", base.with_(subcarrier_spacing_hz=FIG4_SPACING)),
    ]
    return _paired_sweep(base, "n_subcarriers", grid, couplings, threads, settings)


@lru_cache(maxsize=2)
def _figure5_full(threads, settings):
    base = default_scenario()
    grid = log_grid(4, FIG5_MAX_ANTENNAS, integer=True)
    half_wavelength = SPEED_OF_LIGHT / (2 * base.grid.carrier_hz)
    couplings = [
        ("fixed-aperture", base),
        ("fixed-antenna-spacing", base.with_(radius=base.geometry.n_antennas * half_wavelength / (2 * math.pi))),
    ]
    return _paired_sweep(base, "n_antennas", grid, couplings, threads, settings)


def _split(rows, scenarios, param, quantity, metadata):
    which = 0 if quantity == "theta" else 1
    unit = "rad2" if quantity == "theta" else "m2"
    cols = ["coupling", param, f"crb_{quantity}_closed_{unit}",
            f"crb_{quantity}_exact_isotropic_{unit}", f"crb_{quantity}_exact_directional_{unit}"]
    # full rows: coupling, value, closed(theta, r), iso(theta, r), dir(theta, r)
    picked = [[r[0], r[1], r[2 + which], r[4 + which], r[6 + which]] for r in rows]
    return ResultTable(cols, picked, metadata, list(scenarios))


def _figure6(settings):
    base = default_scenario()
    r_grid = log_grid(10**0.5, 1e5)
    cols = ["range_m"]
    for R in FIG6_RADII:
        for B in FIG6_BANDWIDTHS:
            cols.append(f"crb_r_R{R:g}m_B{B / 1e6:g}MHz")
    cols += [f"farfield_bound_B{B / 1e6:g}MHz" for B in FIG6_BANDWIDTHS]
    far = [crb_r_farfield(base.with_(subcarrier_spacing_hz=B / base.grid.n_subcarriers)) for B in FIG6_BANDWIDTHS]
    rows = []
    for r in r_grid:
        row = [float(r)]
        for R in FIG6_RADII:
            for B in FIG6_BANDWIDTHS:
                sc = base.with_(radius=R, range=float(r), subcarrier_spacing_hz=B / base.grid.n_subcarriers)
                row.append(crb_r_closed(sc, settings))
        rows.append(row + far)
    return ResultTable(cols, rows)


def reproduce_figure(fig_id: str, threads: int | None = None,
                     settings: QuadratureSettings = DEFAULT_SETTINGS) -> ResultTable:
    """Tabulate one figure family; see README for the column layout of each id."""
    if fig_id not in FIGURES:
        raise ValidationError(f"unknown figure {fig_id!r}; valid: {', '.join(FIGURES)}")
    meta = {"artifact_version": __version__, "figure": fig_id, "rel_tol": repr(settings.rel_tol)}
    if fig_id == "fig2":
        table = _figure2(settings)
    elif fig_id == "fig3":
        table = _figure3(settings)
    elif fig_id == "fig6":
        table = _figure6(settings)
    else:
        n = resolve_threads(threads)
        if fig_id.startswith("fig4"):
            rows, scenarios = _figure4_full(n, settings)
            param = "n_subcarriers"
            meta.update(fixed_bandwidth_hz=repr(FIG4_BANDWIDTH), fixed_spacing_hz=repr(FIG4_SPACING))
        else:
            rows, scenarios = _figure5_full(n, settings)
            param = "n_antennas"
            meta.update(fixed_radius_m="0.5", fixed_spacing_m=repr(SPEED_OF_LIGHT / 60e9))
        meta["work_budget"] = str(DEFAULT_WORK_BUDGET)
        table = _split(rows, scenarios, param, "theta" if fig_id.endswith("a") else "r", meta)
    table.metadata = {**meta, **table.metadata}
    return table

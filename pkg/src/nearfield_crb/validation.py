"""Built-in invariant and acceptance checks behind ``nearfield-crb validate``.

Each check returns a :class:`CheckResult` with the measured error. The
``fast`` level shrinks fuzz counts and seeds; ``full`` runs the complete
matrix, including the 50-seed sampled-oracle comparison.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .crb_closed import INFINITE_CRB, crb_r_closed, crb_r_farfield, crb_r_single_carrier, crb_theta_closed
from .crb_exact import CovarianceSpec, crb_exact, fim_inner_products, q_matrix, sampled_fim_oracle
from .geometry import ArrayGeometry, TargetLocation, distance_derivatives
from .lemma_sums import closed_form_sums, exact_sums
from .scenario import Scenario, SensingBudget, default_scenario
from .specfun import k_alpha, xi
from .waveform import SPEED_OF_LIGHT, OfdmGrid

EPS = np.finfo(float).eps
LEVELS = ("fast", "full")


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    runtime_s: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<28} {self.detail}  [{self.runtime_s:.2f} s]"


def rel_err(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def fuzz_scenario(rng: np.random.Generator, max_antennas: int = 64, max_subcarriers: int = 64) -> Scenario:
    """Random valid scenario: r/R in [1.1, 100], B/f_c <= 0.5, SNR in [-20, 30] dB."""
    N = int(rng.integers(3, max_antennas + 1))
    R = float(10 ** rng.uniform(-1.3, 0.3))
    r = R * float(10 ** rng.uniform(math.log10(1.1), 2))
    fc = float(10 ** rng.uniform(9, 11))
    M = int(rng.integers(1, max_subcarriers + 1))
    B = fc * float(10 ** rng.uniform(-4, math.log10(0.5)))
    return Scenario(
        ArrayGeometry(N, R),
        TargetLocation(r, float(rng.uniform(0, 2 * math.pi))),
        OfdmGrid.from_bandwidth(fc, M, B, int(rng.integers(1, 512))),
        SensingBudget.from_snr_db(float(rng.uniform(-20, 30))),
    )


def non_increasing(errors, floor: float) -> bool:
    """Monotone up to a round-off floor: values below ``floor`` count as equal."""
    e = np.maximum(np.asarray(errors, dtype=float), floor)
    return bool(np.all(np.diff(e) <= 0))


# ---- individual criteria -------------------------------------------------


def check_identities(level="full") -> CheckResult:
    rng = np.random.default_rng(101)
    worst_pyth = worst_sum = 0.0
    for _ in range(100):
        sc = fuzz_scenario(rng, max_antennas=512)
        d_theta, d_range = distance_derivatives(sc.geometry, sc.target)
        r = sc.target.range
        worst_pyth = max(worst_pyth, float(np.max(np.abs((d_theta / r) ** 2 + d_range**2 - 1))))
        sums = exact_sums(sc.geometry, sc.target)
        N = sc.geometry.n_antennas
        worst_sum = max(worst_sum, abs(sums.u_r - (N - sums.u_theta / r**2)) / N)
    ok = worst_pyth <= 1e-12 and worst_sum <= 1e-12
    return CheckResult("identities", ok, f"pythagorean {worst_pyth:.2e}, u_r sum {worst_sum:.2e} (tol 1e-12)")


def check_large_n_convergence(level="full") -> CheckResult:
    R, r = 0.5, 15.0
    Ns = (8, 16, 32, 64, 128, 256)
    err_ut, err_cr = [], []
    for N in Ns:
        geom, tgt = ArrayGeometry(N, R), TargetLocation(r, 0.3)
        ex, cf = exact_sums(geom, tgt), closed_form_sums(geom, tgt)
        err_ut.append(rel_err(ex.u_theta, cf.u_theta))
        err_cr.append(rel_err(ex.c_r, cf.c_r))
    # errors reach round-off by N = 16; below 8 eps they only jitter
    floor = 8 * EPS
    monotone = non_increasing(err_ut, floor) and non_increasing(err_cr, floor)
    rng = np.random.default_rng(202)
    worst_odd = 0.0
    geom = ArrayGeometry(256, R)
    for theta in rng.uniform(0, 2 * math.pi, 10):
        ex = exact_sums(geom, TargetLocation(r, float(theta)))
        worst_odd = max(worst_odd, abs(ex.c_theta) / (256 * R), abs(ex.eta) / (256 * R))
    ok = monotone and err_ut[-1] <= 1e-8 and err_cr[-1] <= 1e-8 and worst_odd <= 1e-8
    return CheckResult(
        "large_n_convergence", ok,
        f"u_theta {err_ut[0]:.1e}->{err_ut[-1]:.1e}, c_r {err_cr[0]:.1e}->{err_cr[-1]:.1e}, "
        f"monotone={monotone}, |c_theta|,|eta|/NR {worst_odd:.1e}",
    )


def check_k_anchors(level="full") -> CheckResult:
    e1 = abs(k_alpha(1.0) - 2 / math.pi)
    e2 = abs(k_alpha(1e8) - 1)
    e3 = abs(k_alpha(30.0) - (1 - 1 / 3600))
    ok = e1 <= 1e-9 and e2 <= 1e-9 and e3 <= 5e-6
    return CheckResult("k_anchors", ok, f"K(1) {e1:.1e}, K(1e8) {e2:.1e}, K(30) {e3:.1e}")


def _gap_floor(sc: Scenario) -> float:
    # Q11, Q22 are differences of near-equal terms; relative round-off grows like 1/sin^2
    q = q_matrix(fim_inner_products(sc))
    return 16 * EPS * max(1 / q.sin_sq_angle, 1 / q.sin_sq_range)


def _cross_path_gaps(base: Scenario, Ns):
    gaps_theta, gaps_r = [], []
    for N in Ns:
        sc = base.with_(n_antennas=N)
        ex = crb_exact(sc)
        gaps_theta.append(rel_err(ex.crb_theta, crb_theta_closed(sc)))
        gaps_r.append(rel_err(ex.crb_r, crb_r_closed(sc)))
    return gaps_theta, gaps_r


def check_cross_path(level="full") -> CheckResult:
    Ns = (16, 32, 64, 128, 256)
    base = default_scenario()
    gaps_theta, gaps_r = _cross_path_gaps(base, Ns)
    # at R/r = 1/30 the large-N forms are exact to round-off for every N here
    floor = max(_gap_floor(base.with_(n_antennas=N)) for N in Ns)
    monotone = non_increasing(gaps_theta, floor) and non_increasing(gaps_r, floor)
    # close to the circle the discretisation error dominates and must fall strictly
    near = base.with_(range=1.2 * base.geometry.radius, n_subcarriers=16, subcarrier_spacing_hz=10e6 / 16)
    near_theta, near_r = _cross_path_gaps(near, Ns)
    strict = all(b < a for g in (near_theta, near_r) for a, b in zip(g, g[1:]))
    ok = gaps_theta[-1] <= 1e-4 and gaps_r[-1] <= 1e-4 and monotone and strict
    return CheckResult(
        "cross_path", ok,
        f"defaults N=256 theta {gaps_theta[-1]:.1e}, r {gaps_r[-1]:.1e} (tol 1e-4); r gaps over N "
        + "/".join(f"{g:.0e}" for g in gaps_r) + f" below round-off floor {floor:.0e}; "
        f"r/R=1.2 r gaps " + "/".join(f"{g:.0e}" for g in near_r) + f" strictly falling={strict}",
    )


def check_theta_invariance(level="full") -> CheckResult:
    base = default_scenario()
    pairs = [crb_exact(base.with_(angle=float(a))) for a in np.linspace(0.1, 2 * math.pi - 0.1, 5)]
    th = np.array([p.crb_theta for p in pairs])
    rr = np.array([p.crb_r for p in pairs])
    spread = max(np.ptp(th) / th.mean(), np.ptp(rr) / rr.mean())
    return CheckResult("theta_invariance", spread <= 1e-6, f"relative spread {spread:.1e} (tol 1e-6)")


def check_limits(level="full") -> CheckResult:
    base = default_scenario()
    far = base.with_(range=1e5)
    e_a = rel_err(crb_r_closed(far), crb_r_farfield(far))
    single = base.with_(n_subcarriers=1)
    e_b = rel_err(crb_r_closed(single), crb_r_single_carrier(single))
    inf_ok = crb_r_farfield(single) is INFINITE_CRB
    R = base.geometry.radius
    growth = crb_r_single_carrier(base.with_(range=1e8 * R)) / crb_r_single_carrier(base.with_(range=10 * R))
    ok = e_a <= 0.01 and e_b <= 1e-12 and inf_ok and growth > 1e10
    return CheckResult(
        "limiting_cases", ok,
        f"far-field {e_a:.1e} (tol 1e-2), single-carrier {e_b:.1e}, M=1 inf={inf_ok}, divergence x{growth:.1e}",
    )


def check_scaling(level="full") -> CheckResult:
    base = default_scenario()

    def ratios(a, b):
        return crb_theta_closed(b) / crb_theta_closed(a), crb_r_closed(b) / crb_r_closed(a)

    grid = base.grid
    M, df = grid.n_subcarriers, grid.subcarrier_spacing_hz
    # spacing chosen so df^2 (M^2 - 1), the bandwidth term of both bounds, is unchanged;
    # the nominal M df then moves by about 3/(8 M^2)
    df_2m = df * math.sqrt((M * M - 1) / (4 * M * M - 1))
    doubled = {
        "L": base.with_(n_symbols=2 * grid.n_symbols),
        "N": base.with_(n_antennas=2 * base.geometry.n_antennas),
        "M": base.with_(n_subcarriers=2 * M, subcarrier_spacing_hz=df_2m),
    }
    worst = max(abs(x - 0.5) / 0.5 for sc in doubled.values() for x in ratios(base, sc))
    nominal = base.with_(n_subcarriers=2 * M, subcarrier_spacing_hz=df / 2)
    nominal_dev = max(abs(x - 0.5) / 0.5 for x in ratios(base, nominal))
    e_R = abs(ratios(base, base.with_(radius=2 * base.geometry.radius))[0] - 0.25) / 0.25
    spacing = SPEED_OF_LIGHT / (2 * grid.carrier_hz)
    worst_spacing = 0.0
    small = base.with_(n_subcarriers=16, subcarrier_spacing_hz=grid.bandwidth_hz / 16)
    for N in (128, 256):
        a = small.with_(n_antennas=N, radius=N * spacing / (2 * math.pi))
        b = small.with_(n_antennas=2 * N, radius=2 * N * spacing / (2 * math.pi))
        worst_spacing = max(worst_spacing, abs(ratios(a, b)[0] - 0.125) / 0.125,
                            abs(crb_exact(b).crb_theta / crb_exact(a).crb_theta - 0.125) / 0.125)
    ok = worst <= 1e-9 and e_R <= 1e-9 and worst_spacing <= 0.02
    return CheckResult(
        "scaling_laws", ok,
        f"halving {worst:.1e} (M at nominal B: {nominal_dev:.1e}), R-doubling {e_R:.1e}, fixed-spacing 1/8 {worst_spacing:.1e} (tol 2e-2)",
    )


SAMPLED_FIXTURE = dict(n_antennas=8, n_subcarriers=4, n_symbols=256, radius=0.5, range=0.55)
# largest |c_theta| at r/R = 1.1, so the isotropic cross terms carry signal above the sampling noise
SAMPLED_ANGLE = 0.1209


def sampled_fixture() -> Scenario:
    base = default_scenario()
    f = SAMPLED_FIXTURE
    return base.with_(n_antennas=f["n_antennas"], radius=f["radius"], range=f["range"], angle=SAMPLED_ANGLE,
                      n_subcarriers=f["n_subcarriers"], n_symbols=f["n_symbols"],
                      subcarrier_spacing_hz=base.grid.bandwidth_hz / f["n_subcarriers"])


def sampled_errors(sc: Scenario, cov: CovarianceSpec, seeds) -> dict:
    """Relative error of the seed-averaged inner products against the trace values.

    Norms are compared relative to themselves; cross terms relative to the
    Cauchy-Schwarz bound sqrt(||x||^2 ||y||^2), which is the scale of their
    sampling noise.
    """
    ref = fim_inner_products(sc, cov).as_dict()
    draws = [sampled_fim_oracle(sc, cov, seed).as_dict() for seed in seeds]
    mean = {k: np.mean([d[k] for d in draws]) for k in ref}
    norms = {"u": ref["u_norm_sq"], "t": ref["u_theta_norm_sq"], "r": ref["u_r_norm_sq"]}
    scale = {
        "u_norm_sq": norms["u"], "u_theta_norm_sq": norms["t"], "u_r_norm_sq": norms["r"],
        "cross_theta_r": math.sqrt(norms["t"] * norms["r"]),
        "cross_theta_u": math.sqrt(norms["t"] * norms["u"]),
        "cross_r_u": math.sqrt(norms["r"] * norms["u"]),
    }
    return {k: abs(mean[k] - ref[k]) / scale[k] for k in ref}


def check_sampled_oracle(level="full") -> CheckResult:
    sc = sampled_fixture()
    seeds = range(50 if level == "full" else 10)
    tol = 0.05 if level == "full" else 0.12
    worst = {}
    for cov in (CovarianceSpec.isotropic(), CovarianceSpec.directional(sc.target)):
        worst[cov.kind] = max(sampled_errors(sc, cov, seeds).values())
    ok = all(v <= tol for v in worst.values())
    return CheckResult(
        "sampled_oracle", ok,
        f"{len(seeds)} seeds: isotropic {worst['isotropic']:.1e}, directional {worst['directional']:.1e} (tol {tol:g})",
    )


def check_beamforming(level="full") -> CheckResult:
    rng = np.random.default_rng(909)
    scenarios = [default_scenario()] + [fuzz_scenario(rng) for _ in range(10 if level == "full" else 4)]
    worst = 0.0
    ok = True
    for sc in scenarios:
        iso = crb_exact(sc)
        dire = crb_exact(sc, CovarianceSpec.directional(sc.target))
        ratio = max(dire.crb_theta / iso.crb_theta, dire.crb_r / iso.crb_r)
        worst = max(worst, ratio)
        ok &= dire.crb_theta <= iso.crb_theta and dire.crb_r <= iso.crb_r
    return CheckResult("beamforming_order", ok, f"{len(scenarios)} scenarios, max directional/isotropic {worst:.3f}")


def _crossover(ranges, curve, bound, tol=0.01) -> float:
    """Smallest range from which the curve stays within ``tol`` of its far-field constant."""
    within = np.abs(np.asarray(curve) / bound - 1) <= tol
    if not within[-1]:
        return math.inf
    idx = len(within) - 1
    while idx > 0 and within[idx - 1]:
        idx -= 1
    return float(ranges[idx])


def check_figure_shapes(level="full") -> CheckResult:
    from .experiments import FIG2_FRACTIONAL_BANDWIDTHS, FIG6_BANDWIDTHS, FIG6_RADII, reproduce_figure

    notes, ok = [], True
    f2 = reproduce_figure("fig2")
    s = np.array(f2.column("ratio_R_over_r"))
    # below R/r ~ 1.15 B/f_c the s^4 term is too small to beat the -q^2 s^2 dip
    region = s >= 0.1
    for q in FIG2_FRACTIONAL_BANDWIDTHS:
        col = np.array(f2.column(f"xi_q_{q:g}"))
        if q <= 0.1:
            inc = bool(np.all(np.diff(col[region]) > 0))
            ok &= inc
            notes.append(f"xi q={q:g} increasing={inc}")
    # Xi bottoms out near R/r ~ 1.15 B/f_c for every B/f_c; report where, on a fine grid
    fine = np.linspace(0.01, 0.99, 981)
    dips = {q: fine[int(np.argmin([xi(x, q) for x in fine]))] for q in (0.1, 0.5)}
    notes.append("fine-grid Xi minimum at R/r " + ", ".join(f"{v:.3f} (q={q:g})" for q, v in dips.items()))
    slope = np.diff(np.array(f2.column("xi_q_0.5")))
    flip = bool(np.any(slope[:-1] * slope[1:] < 0))
    ok &= flip
    notes.append(f"q=0.5 slope flip={flip}")

    f3 = reproduce_figure("fig3")
    ph = np.array(f3.column("phi"))
    from .specfun import phi

    e_phi1 = abs(phi(1.0) - (0.5 - 4 / math.pi**2))
    f3_ok = bool(np.all(ph > 0) and np.all(np.diff(ph) > 0)) and e_phi1 <= 1e-6
    ok &= f3_ok
    notes.append(f"phi positive/increasing={f3_ok}, phi(1) {e_phi1:.1e}")

    f6 = reproduce_figure("fig6")
    ranges = np.array(f6.column("range_m"))
    for R in FIG6_RADII:
        cross = []
        for B in FIG6_BANDWIDTHS:
            curve = np.array(f6.column(f"crb_r_R{R:g}m_B{B / 1e6:g}MHz"))
            bound = f6.column(f"farfield_bound_B{B / 1e6:g}MHz")[0]
            ok &= abs(curve[-1] / bound - 1) <= 0.01
            cross.append(_crossover(ranges, curve, bound))
        dec = all(b < a for a, b in zip(cross, cross[1:]))
        ok &= dec
        notes.append(f"R={R:g} crossover " + "/".join(f"{c:.3g}" for c in cross) + f" m decreasing={dec}")
    return CheckResult("figure_shapes", bool(ok), "; ".join(notes))


def check_determinism(level="full") -> CheckResult:
    from .cli import cmd_sweep, table_to_csv
    from .config import load_config
    from .experiments import reproduce_figure

    cfg = load_config()
    figure_ids = ("fig2", "fig3", "fig6")

    def render(threads):
        sweep = cmd_sweep(cfg, "n_antennas", [16, 32, 48, 64], "fixed-aperture",
                          ["isotropic", "directional"], threads=threads)
        return [sweep] + [table_to_csv(reproduce_figure(f, threads)) for f in figure_ids]

    outputs = [render(1), render(1), render(4), render(4)]
    same = all(o == outputs[0] for o in outputs[1:])
    return CheckResult("determinism", same, f"sweep + {','.join(figure_ids)} at threads 1,1,4,4 identical={same}")


CHECKS = (
    ("1", check_identities),
    ("2", check_large_n_convergence),
    ("3", check_k_anchors),
    ("4", check_cross_path),
    ("5", check_theta_invariance),
    ("6", check_limits),
    ("7", check_scaling),
    ("8", check_sampled_oracle),
    ("9", check_beamforming),
    ("10", check_figure_shapes),
    ("11", check_determinism),
)


def run_check(fn, level="full") -> CheckResult:
    start = time.perf_counter()
    try:
        res = fn(level)
    except Exception as exc:  # a crash is a failed check, not a crashed report
        res = CheckResult(fn.__name__.removeprefix("check_"), False, f"raised {type(exc).__name__}: {exc}")
    res.runtime_s = time.perf_counter() - start
    return res


def run_checks(level: str = "fast") -> list[CheckResult]:
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}")
    return [run_check(fn, level) for _, fn in CHECKS]

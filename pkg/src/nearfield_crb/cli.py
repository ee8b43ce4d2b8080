"""Command-line entry point: ``nearfield-crb {point,sweep,figure,validate}``.

CSV conventions: a ``#``-prefixed metadata preamble, one header row, ``\\n``
line endings, floats in shortest round-trip form, ``inf`` for an unbounded
CRB and ``n/a`` for an exact-path column skipped by the work budget.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, echo_config, load_config, parse_config
from .crb_closed import InfiniteCrb, crb_r_farfield, crb_r_single_carrier, crb_closed
from .crb_exact import crb_exact
from .errors import ConvergenceError, NearFieldError, UnidentifiableError, ValidationError
from .experiments import (
    COUPLINGS, COVARIANCES, DEFAULT_WORK_BUDGET, FIGURES, INTEGER_PARAMS, SWEEP_PARAMS, ResultTable,
    SweepSpec, reproduce_figure, run_sweep,
)

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

POINT_COLUMNS = ["crb_theta_closed_rad2", "crb_r_closed_m2", "crb_theta_exact_rad2", "crb_r_exact_m2",
                 "crb_r_farfield_m2"]
ECHO_COLUMNS = ["n_antennas", "radius_m", "range_m", "angle_deg", "carrier_hz", "n_subcarriers",
                "subcarrier_spacing_hz", "bandwidth_hz", "n_symbols", "snr_db"]
# CLI column name and unit for each sweep parameter; angles are degrees here
SWEEP_COLUMN = {"n_subcarriers": "n_subcarriers", "n_antennas": "n_antennas", "target_range": "range_m",
                "target_angle": "angle_deg", "radius": "radius_m", "bandwidth": "bandwidth_hz",
                "snr_db": "snr_db"}
CONFIG_MARKER = "config:"

COLUMN_HELP = """\
columns:
  point   crb_theta_closed_rad2, crb_r_closed_m2, crb_theta_exact_rad2, crb_r_exact_m2,
          crb_r_farfield_m2 [, crb_r_single_carrier_m2], then scenario echo columns
          n_antennas, radius_m, range_m, angle_deg, carrier_hz, n_subcarriers,
          subcarrier_spacing_hz, bandwidth_hz, n_symbols, snr_db
  sweep   <swept parameter>, then per requested path: crb_theta_closed_rad2, crb_r_closed_m2,
          crb_{theta,r}_exact_<covariance>_{rad2,m2}, crb_r_farfield_m2, crb_r_single_carrier_m2
  figure  fig2: ratio_R_over_r, xi_q_<B/f_c>; fig3: ratio_R_over_r, phi;
          fig4a/fig4b (CRB_theta / CRB_r vs subcarriers) and fig5a/fig5b (vs antennas):
            coupling, <swept>, crb_*_closed, crb_*_exact_isotropic, crb_*_exact_directional;
          fig6: range_m, crb_r_R<R>m_B<B>MHz, farfield_bound_B<B>MHz
tokens: inf = unbounded CRB, n/a = exact path skipped (N*M above the work budget)
environment: NEARFIELD_CRB_THREADS caps sweep parallelism (default: all CPUs)
"""


def format_cell(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, InfiniteCrb):
        return "inf"
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return "inf" if value == math.inf else repr(value)
    return str(value)


def to_csv(columns, rows, metadata=None, config_lines=None) -> str:
    buf = io.StringIO()
    for key, value in (metadata or {}).items():
        buf.write(f"# {key}: {value}\n")
    if config_lines:
        buf.write(f"# {CONFIG_MARKER}\n")
        for line in config_lines:
            buf.write(f"#   {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def table_to_csv(table: ResultTable, config_lines=None) -> str:
    return to_csv(table.columns, table.rows, table.metadata, config_lines)


def config_from_csv(text: str) -> RunConfig:
    """Re-parse the config block echoed into a CSV preamble."""
    lines, inside = [], False
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        body = line[1:].strip()
        if body == CONFIG_MARKER:
            inside = True
        elif inside:
            lines.append(body)
    if not lines:
        raise ConfigError("no config block in CSV metadata")
    return parse_config("\n".join(lines) + "\n")


def echo_values(sc) -> list:
    g, t, grid = sc.geometry, sc.target, sc.grid
    return [g.n_antennas, g.radius, t.range, math.degrees(t.angle), grid.carrier_hz, grid.n_subcarriers,
            grid.subcarrier_spacing_hz, grid.bandwidth_hz, grid.n_symbols, sc.budget.snr_db]


def cmd_point(cfg: RunConfig) -> str:
    sc = cfg.scenario
    row = [None] * 5
    if "closed" in cfg.paths:
        pair = crb_closed(sc, cfg.settings)
        row[0:2] = [pair.crb_theta, pair.crb_r]
    if "exact" in cfg.paths:
        pair = crb_exact(sc, cfg.covariance_spec())
        row[2:4] = [pair.crb_theta, pair.crb_r]
    # far-field limit is cheap and always reported
    row[4] = crb_r_farfield(sc)
    columns = list(POINT_COLUMNS)
    if "single-carrier" in cfg.paths:
        columns.append("crb_r_single_carrier_m2")
        row.append(crb_r_single_carrier(sc, cfg.settings))
    meta = {"artifact_version": __version__, "command": "point", "covariance": cfg.covariance,
            "seed": str(cfg.seed)}
    return to_csv(columns + ECHO_COLUMNS, [row + echo_values(sc)], meta, echo_config(cfg))


def parse_values(values: str | None, range_: str | None, points: int | None, log: bool, param: str) -> list:
    if (values is None) == (range_ is None):
        raise ConfigError("give exactly one of --values or --range")
    if values is not None:
        try:
            out = [float(v) for v in values.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"--values must be a comma-separated list of numbers, got {values!r}") from None
    else:
        try:
            lo, hi = (float(x) for x in range_.split(":"))
        except ValueError:
            raise ConfigError(f"--range must look like lo:hi, got {range_!r}") from None
        n = 10 if points is None else points
        if n < 1:
            raise ConfigError("--points must be positive")
        if log:
            if lo <= 0 or hi <= 0:
                raise ConfigError("--log needs a positive range")
            out = list(np.logspace(math.log10(lo), math.log10(hi), n))
        else:
            out = list(np.linspace(lo, hi, n))
    if param in INTEGER_PARAMS:
        if range_ is None:
            if any(v != int(v) for v in out):
                raise ConfigError(f"{param} values must be integers")
            out = [int(v) for v in out]
        else:
            # rounding a log grid can repeat small integers
            out = sorted({int(round(v)) for v in out})
    return [v if isinstance(v, int) else float(v) for v in out]


def cmd_sweep(cfg: RunConfig, param: str, values: list, coupling: str | None, covariances=None,
              threads: int | None = None, work_budget: int = DEFAULT_WORK_BUDGET) -> str:
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"unknown --param {param!r}; valid parameters: {', '.join(SWEEP_PARAMS)}")
    coupling = coupling or COUPLINGS[param][0]
    internal = [math.radians(v) for v in values] if param == "target_angle" else values
    spec = SweepSpec(cfg.scenario, param, tuple(internal), coupling, paths=cfg.paths,
                     covariances=tuple(covariances or (cfg.covariance,)), work_budget=work_budget,
                     seed=cfg.seed, settings=cfg.settings)
    table = run_sweep(spec, threads)
    table.columns[0] = SWEEP_COLUMN[param]
    for row, value in zip(table.rows, values):
        row[0] = value
    return table_to_csv(table, echo_config(cfg))


def cmd_figure(fig_id: str, out_dir: str = ".", threads: int | None = None) -> list[str]:
    ids = FIGURES if fig_id == "all" else (fig_id,)
    if fig_id != "all" and fig_id not in FIGURES:
        raise ConfigError(f"unknown figure id {fig_id!r}; valid: {', '.join(FIGURES)}, all")
    written = []
    os.makedirs(out_dir, exist_ok=True)
    for fid in ids:
        path = os.path.join(out_dir, f"{fid}.csv")
        text = table_to_csv(reproduce_figure(fid, threads))
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(path)
    return written


def cmd_validate(level: str, stream=None) -> bool:
    from .validation import run_checks

    stream = stream or sys.stdout
    results = run_checks(level)
    for res in results:
        stream.write(res.line() + "\n")
    passed = sum(r.passed for r in results)
    stream.write(f"{passed}/{len(results)} checks passed\n")
    return passed == len(results)


def _write(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nearfield-crb",
        description="Near-field CRBs for angle/range sensing with a uniform circular array and OFDM.",
        epilog=COLUMN_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="scenario config (default: bundled reference scenario)")
        p.add_argument("--out", metavar="PATH", help="write CSV here instead of standard output")
        p.add_argument("--covariance", metavar="KIND",
                       help="isotropic, directional, or a comma list (sweep only)")
        p.add_argument("--seed", type=int, metavar="INT")

    p = sub.add_parser("point", help="CRBs for one scenario", epilog=COLUMN_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)

    p = sub.add_parser("sweep", help="sweep one scenario parameter", epilog=COLUMN_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)
    p.add_argument("--param", required=True, help=f"one of: {', '.join(SWEEP_PARAMS)}")
    p.add_argument("--values", metavar="a,b,c")
    p.add_argument("--range", dest="range_", metavar="lo:hi")
    p.add_argument("--points", type=int, metavar="K", help="points for --range (default 10)")
    p.add_argument("--log", action="store_true", help="log-spaced --range")
    p.add_argument("--coupling", metavar="RULE",
                   help="fixed-bandwidth | fixed-spacing (subcarriers), fixed-aperture | "
                        "fixed-antenna-spacing (antennas), none (others)")
    p.add_argument("--work-budget", type=int, default=DEFAULT_WORK_BUDGET, metavar="N*M",
                   help="skip exact-path columns (n/a) above this N*M")

    p = sub.add_parser("figure", help="tabulate a figure family to <id>.csv", epilog=COLUMN_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("id", help=f"one of: {', '.join(FIGURES)}, all")
    p.add_argument("--out", metavar="DIR", default=".", help="output directory (default: current)")

    p = sub.add_parser("validate", help="run the built-in invariant and acceptance checks")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    return parser


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.seed is not None or args.covariance is not None:
        raw = {s: dict(v) for s, v in cfg.raw.items()}
        if args.seed is not None:
            raw["compute"]["seed"] = str(args.seed)
        if args.covariance is not None and "," not in args.covariance:
            raw["compute"]["covariance"] = args.covariance
        text = "\n".join(f"[{s}]\n" + "\n".join(f"{k} = {v}" for k, v in e.items()) for s, e in raw.items())
        cfg = parse_config(text + "\n")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        if args.command == "point":
            _write(cmd_point(_load(args)), args.out)
        elif args.command == "sweep":
            cfg = _load(args)
            covariances = None
            if args.covariance:
                covariances = [c.strip() for c in args.covariance.split(",") if c.strip()]
                bad = [c for c in covariances if c not in COVARIANCES]
                if bad:
                    raise ConfigError(f"unknown covariance {bad}; valid: {', '.join(COVARIANCES)}")
            if args.param not in SWEEP_PARAMS:
                raise ConfigError(f"unknown --param {args.param!r}; valid parameters: {', '.join(SWEEP_PARAMS)}")
            values = parse_values(args.values, args.range_, args.points, args.log, args.param)
            text = cmd_sweep(cfg, args.param, values, args.coupling, covariances, work_budget=args.work_budget)
            _write(text, args.out)
        elif args.command == "figure":
            for path in cmd_figure(args.id, args.out):
                print(path, file=sys.stderr)
        elif args.command == "validate":
            return EXIT_OK if cmd_validate(args.level) else EXIT_VALIDATION
    except (ConvergenceError, UnidentifiableError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, NearFieldError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

import csv
import io
import math

import pytest

from nearfield_crb import default_scenario
from nearfield_crb.cli import (
    EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, config_from_csv, format_cell, main, to_csv,
)
from nearfield_crb.crb_closed import INFINITE_CRB

from test_config import MINIMAL


def rows_of(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


@pytest.fixture
def cfg_path(tmp_path):
    def write(text, name="cfg.ini"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


def test_format_cell():
    assert format_cell(None) == "n/a"
    assert format_cell(INFINITE_CRB) == "inf"
    assert format_cell(0.1) == "0.1"
    assert format_cell(3) == "3"
    assert float(format_cell(1 / 3)) == 1 / 3


def test_csv_conventions():
    text = to_csv(["a", "b"], [[1.5, "x,y"]], {"k": "v"}, ["[array]"])
    assert text.startswith("# k: v\n# config:\n#   [array]\na,b\n")
    assert '"x,y"' in text and "\r" not in text


def test_point_defaults(capsys):
    assert main(["point"]) == EXIT_OK
    out = capsys.readouterr().out
    (row,) = rows_of(out)
    assert float(row["crb_theta_exact_rad2"]) == pytest.approx(float(row["crb_theta_closed_rad2"]), rel=1e-4)
    assert float(row["crb_r_exact_m2"]) == pytest.approx(float(row["crb_r_closed_m2"]), rel=1e-4)
    assert row["angle_deg"] == "90.0" and row["n_antennas"] == "256"
    assert config_from_csv(out).scenario == default_scenario()


def test_point_single_carrier_reports_inf(capsys, cfg_path):
    text = MINIMAL.replace("subcarriers = 8", "subcarriers = 1")
    assert main(["point", "--config", cfg_path(text)]) == EXIT_OK
    (row,) = rows_of(capsys.readouterr().out)
    assert row["crb_r_farfield_m2"] == "inf"


def test_point_writes_out_file(capsys, tmp_path, cfg_path):
    out = tmp_path / "point.csv"
    assert main(["point", "--config", cfg_path(MINIMAL), "--out", str(out)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert config_from_csv(out.read_text()).scenario.geometry.n_antennas == 16


def test_point_directional(capsys, cfg_path):
    assert main(["point", "--config", cfg_path(MINIMAL), "--covariance", "directional"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "# covariance: directional" in out
    assert config_from_csv(out).covariance == "directional"


def test_malformed_config_exit_2(capsys, cfg_path):
    assert main(["point", "--config", cfg_path("[array\nantennas = 3\n")]) == EXIT_CONFIG
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "line" in captured.err


def test_bad_flags_exit_2(capsys):
    assert main(["point", "--bogus"]) == EXIT_CONFIG
    assert main(["launch"]) == EXIT_CONFIG


def test_unidentifiable_exit_3(capsys, cfg_path):
    # vanishing signal energy drives det Q below the identifiability floor
    text = MINIMAL.replace("snr_db = 10", "gain_sq = 1e-300\npower_w = 1e-10\nnoise_w = 1")
    assert main(["point", "--config", cfg_path(text)]) == EXIT_NUMERICAL
    assert capsys.readouterr().out == ""


def test_sweep_fixed_aperture_monotone(capsys):
    code = main(["sweep", "--param", "n_antennas", "--range", "16:256", "--points", "5", "--log",
                 "--coupling", "fixed-aperture"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    rows = rows_of(out)
    assert [r["n_antennas"] for r in rows] == ["16", "32", "64", "128", "256"]
    for col in ("crb_theta_closed_rad2", "crb_r_closed_m2", "crb_theta_exact_isotropic_rad2",
                "crb_r_exact_isotropic_m2"):
        vals = [float(r[col]) for r in rows]
        assert all(b < a for a, b in zip(vals, vals[1:]))
    assert "# param: n_antennas" in out


def test_sweep_angle_in_degrees(capsys):
    assert main(["sweep", "--param", "target_angle", "--values", "0,90,180"]) == EXIT_OK
    rows = rows_of(capsys.readouterr().out)
    assert [r["angle_deg"] for r in rows] == ["0.0", "90.0", "180.0"]


def test_sweep_farfield_constant(capsys, cfg_path):
    text = MINIMAL.replace("[budget]", "[compute]\npaths = closed, farfield\n[budget]")
    assert main(["sweep", "--config", cfg_path(text), "--param", "target_range",
                 "--values", "5,50,500,5000"]) == EXIT_OK
    far = {r["crb_r_farfield_m2"] for r in rows_of(capsys.readouterr().out)}
    assert len(far) == 1


def test_sweep_budget_marks_na(capsys):
    assert main(["sweep", "--param", "n_antennas", "--values", "16,32", "--coupling", "fixed-aperture",
                 "--work-budget", "4096"]) == EXIT_OK
    rows = rows_of(capsys.readouterr().out)
    assert rows[0]["crb_r_exact_isotropic_m2"] != "n/a"
    assert rows[1]["crb_r_exact_isotropic_m2"] == "n/a"


def test_sweep_both_covariances(capsys):
    assert main(["sweep", "--param", "radius", "--values", "0.25,0.5",
                 "--covariance", "isotropic,directional"]) == EXIT_OK
    header = rows_of(capsys.readouterr().out)[0].keys()
    assert "crb_r_exact_directional_m2" in header and "crb_r_exact_isotropic_m2" in header


@pytest.mark.parametrize("args", [
    ["--param", "bogus", "--values", "1"],
    ["--param", "n_antennas"],
    ["--param", "n_antennas", "--values", "16", "--range", "1:2"],
    ["--param", "n_antennas", "--values", "16,8"],
    ["--param", "n_antennas", "--values", "16", "--coupling", "fixed-bandwidth"],
    ["--param", "target_range", "--values", "0.1"],
    ["--param", "target_range", "--range", "a:b"],
    ["--param", "radius", "--values", "0.5", "--covariance", "omni"],
])
def test_sweep_errors_exit_2(capsys, args):
    assert main(["sweep", *args]) == EXIT_CONFIG
    assert capsys.readouterr().out == ""


def test_unknown_param_lists_valid(capsys):
    main(["sweep", "--param", "bogus", "--values", "1"])
    assert "n_subcarriers" in capsys.readouterr().err


def test_figure_writes_files(tmp_path):
    assert main(["figure", "fig3", "--out", str(tmp_path)]) == EXIT_OK
    text = (tmp_path / "fig3.csv").read_text()
    rows = rows_of(text)
    phi = [float(r["phi"]) for r in rows]
    assert all(b > a for a, b in zip(phi, phi[1:]))
    assert "# figure: fig3" in text


def test_figure_unknown_id(tmp_path):
    assert main(["figure", "fig9", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_help_documents_columns(capsys):
    assert main(["--help"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "crb_theta_closed_rad2" in out and "n/a" in out and "NEARFIELD_CRB_THREADS" in out

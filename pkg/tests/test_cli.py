from __future__ import annotations

import csv
import io
import math
import subprocess
import sys

import pytest

from casimir_thermal.cli import (EXIT_OK, EXIT_USAGE, TABLE3_MODELS, UsageError, build_parser, main,
                                 read_config_file, resolve)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def parse(text):
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    return list(csv.reader(io.StringIO(body)))


def header(text):
    return [line[2:] for line in text.splitlines() if line.startswith("#")]


# -- usage errors --------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    [],
    ["table9"],
    ["pressure", "--a-min", "0.5", "--a-max", "0.2"],
    ["pressure", "--a-min", "0.3", "--a-steps", "0"],
    ["pressure", "--a-min", "-1"],
    ["pressure", "--model", "unobtainium", "--a-min", "0.3"],
    ["pressure", "--formulation", "dielectric", "--a-min", "0.3"],
    ["heat", "--formulation", "real", "--a-min", "0.3"],
    ["heat", "--t1", "-5", "--a-min", "0.3"],
    ["pressure", "--tol", "0", "--a-min", "0.3"],
    ["nernst", "--ladder", "30,x"],
    ["pressure", "--config", "/nonexistent/file.cfg"],
])
def test_usage_errors_exit_one(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == EXIT_USAGE
    assert out == ""
    assert "error" in err


def test_nernst_ladder_below_one_kelvin_is_usage_error(capsys):
    code, _, err = run(["nernst", "--ladder", "2,0.5"], capsys)
    assert code == EXIT_USAGE and "1 K" in err


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["--version"])
    assert exc.value.code == 0


# -- config files --------------------------------------------------------------

def test_config_file_parsing(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\nt1 = 77   # inline\nomega-p-ev = 8.5\n\nmodel=drude-eps\n")
    assert read_config_file(str(p)) == {"t1": "77", "omega_p_ev": "8.5", "model": "drude-eps"}
    p.write_text("t1 77\n")
    with pytest.raises(UsageError):
        read_config_file(str(p))


def test_flags_override_config(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("t1 = 77\nmodel = drude-eps\na_min = 0.4\n")
    cfg = resolve(build_parser().parse_args(["pressure", "--config", str(p), "--t1", "150"]))
    assert cfg.t1 == 150.0 and cfg.model == "drude-eps" and cfg.a_um == (0.4,)
    p.write_text("colour = blue\n")
    with pytest.raises(UsageError):
        resolve(build_parser().parse_args(["pressure", "--config", str(p)]))
    p.write_text("t1 = warm\n")
    with pytest.raises(UsageError):
        resolve(build_parser().parse_args(["pressure", "--config", str(p)]))


def test_default_grids():
    cfg = resolve(build_parser().parse_args(["table1"]))
    assert cfg.a_um == (0.2, 0.25, 0.3, 0.35, 0.4, 1.0)
    assert cfg.model == "normal-skin"
    cfg = resolve(build_parser().parse_args(["fig3", "--a-min", "0.2", "--a-max", "1", "--a-steps", "3"]))
    assert cfg.a_um == pytest.approx((0.2, 0.6, 1.0)) and (cfg.t1, cfg.t2) == (320.0, 300.0)
    assert resolve(build_parser().parse_args(["table3"])).t1 == 295.0


# -- commands ------------------------------------------------------------------

def test_pressure_ideal_metal_matches_closed_form(capsys):
    code, out, _ = run(["pressure", "--model", "ideal", "--t1", "0", "--a-min", "0.5"], capsys)
    assert code == EXIT_OK
    rows = parse(out)
    assert rows[0] == ["a_um", "P0_mPa", "dP_mPa", "P_total_mPa", "P_exp_mPa", "delta_exp_mPa"]
    hbar_c = 1.054571817e-34 * 299792458.0
    expect = -math.pi**2 * hbar_c / (240 * (0.5e-6) ** 4) * 1e3
    assert float(rows[1][1]) == pytest.approx(expect, rel=1e-8)
    assert float(rows[1][2]) == 0.0


def test_pressure_reports_experiment_and_formulation(capsys):
    code, out, _ = run(["pressure", "--model", "plasma", "--a-min", "0.3"], capsys)
    assert code == EXIT_OK
    row = parse(out)[1]
    assert float(row[4]) == 114.7
    assert float(row[1]) == pytest.approx(-113.6, rel=0.02)
    assert "formulation = imaginary" in header(out)


def test_output_is_bitwise_deterministic(tmp_path, capsys):
    argv = ["pressure", "--model", "drude-eps", "--a-min", "0.3", "--a-max", "0.5", "--a-steps", "2"]
    first = run(argv, capsys)[1]
    second = run(argv, capsys)[1]
    assert first == second
    out = tmp_path / "p.csv"
    assert main(argv + ["--out", str(out)]) == EXIT_OK
    assert out.read_bytes() == first.encode()


def test_header_records_configuration(capsys):
    _, out, _ = run(["pressure", "--model", "drude-eps", "--a-min", "0.4", "--t1", "77", "--gamma", "1e13"], capsys)
    h = header(out)
    assert h[0].startswith("casimir-thermal ")
    for line in ("command = pressure", "model = drude-eps", "a_um = 0.4", "t1 = 77.0", "gamma = 10000000000000.0"):
        assert line in h


def test_table3_single_model(capsys):
    code, out, _ = run(["table3", "--model", "drude-eps"], capsys)
    assert code == EXIT_OK
    rows = parse(out)
    assert rows[0] == ["model", "T_K", "emittivity", "measured"]
    assert len(rows) == 2 and rows[1][0] == "drude-eps"
    assert float(rows[1][2]) == pytest.approx(0.0098, rel=0.1)
    assert float(rows[1][3]) == 0.02
    assert "zp" in TABLE3_MODELS


def test_heat_columns_and_status(capsys):
    code, out, _ = run(["heat", "--model", "drude-z", "--a-min", "0.5"], capsys)
    assert code == EXIT_OK
    rows = parse(out)
    assert rows[0] == ["a_um", "S_total", "S_PW", "S_EW", "S_TE_PW", "S_TM_PW", "S_TE_EW", "S_TM_EW"]
    vals = [float(x) for x in rows[1]]
    assert vals[1] == pytest.approx(vals[2] + vals[3], rel=1e-9)
    assert "status" not in rows[0]


def test_fig4_fraction_bounds(capsys):
    code, out, _ = run(["fig4", "--model", "normal-skin", "--a-min", "0.3"], capsys)
    assert code == EXIT_OK
    rows = parse(out)
    assert rows[0] == ["a_um", "fTE_EW_normal-skin"]
    assert -1.0 <= float(rows[1][1]) <= 1.01


def test_nernst_one_point_is_inconclusive_with_exit_zero(capsys):
    code, out, err = run(["nernst", "--model", "ir", "--a-min", "1", "--ladder", "30"], capsys)
    assert code == EXIT_OK
    assert "verdict = inconclusive" in header(out)
    assert any(line.startswith("diagnostic:") for line in header(out))
    assert "inconclusive" in err
    assert parse(out)[0] == ["T_K", "F_numeric", "F_asymptotic", "S_numeric", "S_asymptotic"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "casimir_thermal", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip()

import csv
import io
import math

import pytest

from iotaoi import cli
from iotaoi.model import NetworkParams


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def _run(cfg):
    out, log = io.StringIO(), io.StringIO()
    code = cli.run(cfg, out=out, log=log)
    return code, out.getvalue(), log.getvalue()


# -- parsing --------------------------------------------------------------------

def test_db_suffix_stored_linearly():
    cfg = cli.parse_config("beta_b = 3 dB\n")
    assert cfg.params.beta_b == pytest.approx(10**0.3, rel=1e-15)
    assert cfg.params.beta_b == pytest.approx(1.9953, abs=1e-4)
    assert cli.parse_config("p_b = 90 dBm").params.p_b == pytest.approx(1e9)


def test_empty_config_gives_defaults():
    cfg = cli.parse_config("")
    assert cfg.params == NetworkParams()
    assert cfg.command == "analytic"
    assert cli.parse_config("# only a comment\n\n   \n").params == NetworkParams()


def test_comments_and_case():
    cfg = cli.parse_config("Q_D = 0.5   # ALOHA\nepsilon=1\n")
    assert cfg.params.q_d == 0.5 and cfg.params.epsilon == 1.0


def test_unknown_sweep_param():
    with pytest.raises(cli.ConfigError) as exc:
        cli.parse_config("sweep_param = frobnicate\nsweep_values = 1, 2\n")
    assert exc.value.code == "UNKNOWN_PARAM"


def test_unknown_key_reports_line():
    with pytest.raises(cli.ConfigError) as exc:
        cli.parse_config("q_d = 0.3\n\nfrobnicate = 1\n")
    assert exc.value.code == "UNKNOWN_PARAM"
    assert "line 3" in str(exc.value)


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("q_d 0.3\n", "line 1"),
        ("q_d = 0.3\nq_d = 0.4\n", "line 2"),
        ("\nr_d = two\n", "line 2"),
        ("sweep_values = 1, 2\n", "line 1"),
    ],
)
def test_parse_errors_are_line_numbered(text, fragment):
    with pytest.raises(cli.ConfigError) as exc:
        cli.parse_config(text)
    assert fragment in str(exc.value)


def test_validation_errors_surface():
    with pytest.raises(Exception) as exc:
        cli.parse_config("q_d = 1.5\n")
    assert "q_d" in str(exc.value)


def test_sweep_values_parsed_with_units():
    cfg = cli.parse_config("sweep_param = beta_d\nsweep_values = -10 dB, 0 dB, 10dB\n")
    assert cfg.sweep_values == pytest.approx([0.1, 1.0, 10.0])
    assert len(list(cfg.points())) == 3


def test_empty_sweep_rejected():
    with pytest.raises(cli.ConfigError) as exc:
        cli.parse_config("sweep_param = q_d\nsweep_values = ,\n")
    assert exc.value.code == "EMPTY_SWEEP"


def test_presets():
    cfg = cli.parse_config("preset = fig7\n")
    assert len(list(cfg.points())) == 8
    with pytest.raises(cli.ConfigError) as exc:
        cli.parse_config("preset = fig99\n")
    assert exc.value.code == "UNKNOWN_PRESET"


def test_unknown_command():
    with pytest.raises(cli.ConfigError) as exc:
        cli.parse_config("command = plot\n")
    assert exc.value.code == "UNKNOWN_COMMAND"


# -- runs ---------------------------------------------------------------------------

def test_analytic_row_columns():
    code, out, log = _run(cli.parse_config(""))
    assert code == cli.EXIT_OK
    rows = _rows(out)
    assert len(rows) == 1
    for col in ("P_d", "zeta_d", "zeta_b", "M_1", "M_2", "M_-1", "M_-2", "T_d", "T_N", "T_N_star", "Delta_1", "Delta_2"):
        assert col in rows[0]
    assert float(rows[0]["P_d"]) == pytest.approx(0.98686, abs=1e-5)
    assert "1 row(s)" in log


def test_orthogonal_reports_zero_c():
    code, out, _ = _run(cli.parse_config("access_mode = orthogonal\n"))
    assert code == 0
    assert float(_rows(out)[0]["C_1"]) == 0.0


def test_load_approx_column_optional():
    _, out, _ = _run(cli.parse_config("corollary5_variant = true\n"))
    assert "Delta_1_load_approx" in _rows(out)[0]
    _, out, _ = _run(cli.parse_config(""))
    assert "Delta_1_load_approx" not in _rows(out)[0]


def test_fit_area_defaults():
    code, out, _ = _run(cli.parse_config("command = fit-area\n"))
    assert code == 0
    row = _rows(out)[0]
    assert float(row["atom_prob"]) == pytest.approx(0.1339, abs=1e-4)
    assert float(row["mean_area"]) == pytest.approx(3950.7, abs=0.1)
    assert float(row["kappa1"]) > 0 and float(row["kappa2"]) > 0


def test_sweep_rows_and_formatting():
    cfg = cli.parse_config("command = sweep\nsweep_param = q_d\nsweep_values = 0.1, 0.3, 0.5\n")
    code, out, _ = _run(cfg)
    assert code == 0
    assert out.endswith("\r\n")
    rows = _rows(out)
    assert [float(r["q_d"]) for r in rows] == [0.1, 0.3, 0.5]
    # shortest round-trip decimal
    v = float(rows[1]["P_d"])
    assert repr(v) == rows[1]["P_d"]
    pd = [float(r["P_d"]) for r in rows]
    assert pd[0] > pd[1] > pd[2]


def test_csv_byte_identical():
    text = "command = simulate\nn_realizations = 100\nn_slots = 30\nwindow_side = 2000\nmaster_seed = 9\n"
    a = _run(cli.parse_config(text))[1]
    b = _run(cli.parse_config(text))[1]
    assert a == b and a.count("\r\n") == 2
    assert "P_d_ci" in _rows(a)[0]


def test_numerical_failure_exit_and_trailer():
    cfg = cli.parse_config("sweep_param = jm_radius\nsweep_values = 40, 10\n")
    code, out, log = _run(cfg)
    assert code == cli.EXIT_NUMERICAL
    lines = out.strip().split("\r\n")
    assert len(lines) == 3
    assert lines[-1].startswith("ERROR,")
    assert "numerical failure" in log


def test_compare_rows_and_tolerance_exit():
    base = (
        "command = compare\nn_realizations = 200\nn_slots = 100\nwindow_side = 2000\n"
        "sweep_param = beta_d\nsweep_values = -10 dB, 0 dB, 10 dB\n"
    )
    code, out, _ = _run(cli.parse_config(base))
    rows = _rows(out)
    assert len(rows) == 3
    for r in rows:
        assert float(r["P_d_rel_err"]) <= 0.05
        assert r["P_d_ok"] == "true"
    # an impossible tolerance must fail the run
    small = "command = compare\nn_realizations = 100\nn_slots = 20\nwindow_side = 2000\ntol_p_d = 0\n"
    code, _, log = _run(cli.parse_config(small))
    assert code == cli.EXIT_TOLERANCE
    assert "exceeded" in log


def test_main_usage_and_overrides(tmp_path, capsys):
    assert cli.main(["frobnicate"]) == cli.EXIT_USAGE
    assert cli.main(["analytic", str(tmp_path / "missing.cfg")]) == cli.EXIT_USAGE
    assert cli.main(["analytic", "--set", "q_d"]) == cli.EXIT_USAGE
    assert cli.main(["analytic", "--set", "nope=1"]) == cli.EXIT_USAGE
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("q_d = 0.3\n", encoding="utf-8")
    out = tmp_path / "out.csv"
    code = cli.main(["analytic", str(cfg), "-o", str(out), "--set", "q_d=0.6"])
    assert code == cli.EXIT_OK
    rows = _rows(out.read_text(encoding="utf-8"))
    ref = _rows(_run(cli.parse_config("q_d = 0.6"))[1])
    assert rows[0]["P_d"] == ref[0]["P_d"]
    capsys.readouterr()


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run(
        [sys.executable, "-m", "iotaoi", "fit-area", "--set", "jm_radius=40"],
        capture_output=True, text=True, timeout=120,
    )
    assert res.returncode == 0
    assert res.stdout.startswith("kappa1,")
    assert math.isfinite(float(_rows(res.stdout)[0]["kappa1"]))

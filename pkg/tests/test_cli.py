from __future__ import annotations

import io
import subprocess
import sys

import pytest

from vomap.cli import EXIT_ANALYSIS, EXIT_INVALID, EXIT_OK, parse_config_text, run
from vomap.errors import DomainError


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


def test_bound_T2():
    code, out = call("bound", "--alphas", "0.2,0.6")
    assert code == EXIT_OK
    assert "stable region: (-0.148698, 1)" in out


def test_bound_T3():
    code, out = call("bound", "--alphas", "0.2,0.4,0.6")
    assert code == EXIT_OK
    assert "(-0.322259, 1)" in out
    assert "determinant residual" in out


def test_bound_long_period_reports_heuristic():
    code, out = call("bound", "--alphas", "0.5,0.5,0.5,0.5,0.5")
    assert code == EXIT_OK
    assert "MeanOrderHeuristic" in out and "experimental" in out


def test_simulate_geometric():
    code, out = call("simulate", "--alphas", "1.0", "--r", "0.5", "--x0", "1", "--horizon", "10")
    assert code == EXIT_OK
    assert "final value: 0.000976562" in out
    assert "memory: full" in out


def test_simulate_writes_file(tmp_path):
    path = tmp_path / "ts.csv"
    code, out = call("simulate", "--alphas", "[0.2, 0.6]", "--r", "1.1", "--horizon", "5000",
                     "--output", str(path))
    assert code == EXIT_OK
    assert "status: Unstable" in out
    assert path.read_text().splitlines()[-1].startswith(out.split("steps computed: ")[1].split()[0])


def test_char_and_regularized():
    code, out = call("char", "--alphas", "0.2,0.6", "--r", "1", "--w", "2")
    # det M at r = 1 is (-z)^2 with z = w^2
    assert code == EXIT_OK and "value: 16+0j" in out
    code, out = call("char", "--alphas", "0.2,0.6", "--r", "-0.148698354", "--w", "1",
                     "--regularized")
    assert code == EXIT_OK
    assert float(out.split("|value|: ")[1].split()[0]) < 1e-8


def test_threshold_command():
    code, out = call("threshold", "--alphas", "1.0", "--tol", "1e-2", "--horizon", "2000")
    assert code == EXIT_OK
    assert abs(float(out.split("threshold: ")[1].split()[0]) + 1.0) < 1e-2


def test_sweep_analytic_command(tmp_path):
    path = tmp_path / "t3.csv"
    code, out = call("sweep-analytic", "--n-samples", "50", "--seed", "4", "--output", str(path))
    assert code == EXIT_OK
    assert "failed determinant checks: 0" in out
    assert path.exists()


def test_sweep_empirical_command(tmp_path, monkeypatch):
    monkeypatch.setenv("VOM_THREADS", "1")
    path = tmp_path / "emp.csv"
    code, out = call("sweep-empirical", "--periods", "1", "--n-configs", "1", "--horizon", "1000",
                     "--horizon-cap", "1000", "--tol", "0.01", "--output", str(path))
    assert code == EXIT_OK
    assert "rows: 1" in out


@pytest.mark.parametrize("argv", [
    ("bound", "--alphas", "0.2,1.5"),
    ("bound", "--alphas", "abc"),
    ("bound",),
    ("simulate", "--alphas", "0.5"),
    ("simulate", "--alphas", "0.5", "--r", "0.5", "--horizon", "0"),
    ("char", "--alphas", "0.2,0.6", "--r", "0.5", "--w", "-1"),
    ("frobnicate",),
])
def test_invalid_input_exit_code(argv):
    code, _ = call(*argv)
    assert code == EXIT_INVALID


def test_bracketing_failure_exit_code():
    code, _ = call("threshold", "--alphas", "0.2,0.6", "--r-min", "0.0", "--r-max", "0.5",
                   "--horizon", "1000", "--horizon-cap", "1000")
    assert code == EXIT_ANALYSIS


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# geometric check\nalphas = [1.0]\nr = 0.5\nx0 = 1\nhorizon = 10\n")
    code, out = call("simulate", "--config", str(cfg))
    assert code == EXIT_OK and "final value: 0.000976562" in out
    code, out = call("simulate", "--config", str(cfg), "--horizon", "1")
    assert "final value: 0.5" in out


def test_config_round_trip(tmp_path):
    saved = tmp_path / "eff.cfg"
    code, first = call("simulate", "--alphas", "0.3,0.9", "--r", "0.8", "--horizon", "500",
                       "--save-config", str(saved))
    assert code == EXIT_OK
    code, second = call("simulate", "--config", str(saved))
    assert code == EXIT_OK
    assert first == second
    assert saved.read_text() in first


@pytest.mark.parametrize("text, where", [
    ("alphas = [0.2]\nbogus = 1\n", ":2:"),
    ("alphas = [0.2]\nalphas = [0.3]\n", ":2:"),
    ("horizon = ten\n", ":1:"),
    ("just words\n", ":1:"),
])
def test_strict_config_parsing(text, where, tmp_path):
    with pytest.raises(DomainError, match=where):
        parse_config_text(text, "run.cfg")
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    code, _ = call("bound", "--config", str(path))
    assert code == EXIT_INVALID


def test_missing_config_file(tmp_path):
    code, _ = call("bound", "--config", str(tmp_path / "nope.cfg"))
    assert code == EXIT_INVALID


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "vomap.cli", "bound", "--alphas", "0.3,0.9"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "(-0.231144, 1)" in proc.stdout

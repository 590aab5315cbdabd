import io
import json
import math
import subprocess
import sys

import pytest

from gkzint.cli import main

GAUSS = '{"n":1,"terms":[{"k":[2],"c":[-1,0]}]}'
QUARTIC = '{"n":1,"terms":[{"k":[2],"c":[1,0]},{"k":[4],"c":[-1,0]}]}'
CUBIC = '{"n":1,"terms":[{"k":[3],"c":[1,0]}]}'
NONSPAN = '{"n":2,"terms":[{"k":[1,1],"c":[-1,0]}]}'
CROSS = (
    '{"n":2,"terms":[{"k":[2,0],"c":[-1,0]},{"k":[1,1],"c":[0.3,0]},'
    '{"k":[0,2],"c":[-1,0]}]}'
)


def run_cli(args, stdin_text=None, capsys=None, monkeypatch=None):
    if stdin_text is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin_text))
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, text, name="poly.json"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_system_gaussian(tmp_path, capsys):
    code, out, _ = run_cli(["system", write(tmp_path, GAUSS)], capsys=capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["lattice_basis"] == []
    assert doc["alpha"] == [-1]
    assert doc["euler_operators"] == [{"axis": 1, "weights": {"2": 2}, "rhs": -1}]


def test_system_quartic_basis_and_pairs(tmp_path, capsys):
    code, out, _ = run_cli(["system", write(tmp_path, QUARTIC)], capsys=capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["lattice_basis"] == [[2, -1]]
    (pair,) = doc["toric_pairs_for_basis"]
    # both sides of (2, -1) insert x^4 under the integral: index (4)
    assert pair["moment_index"] == [4]
    assert pair["lhs"] == [[2], [2]]
    assert pair["rhs"] == [[4]]


def test_system_non_spanning_exits_3(tmp_path, capsys):
    code, _, err = run_cli(["system", write(tmp_path, NONSPAN)], capsys=capsys)
    assert code == 3
    assert "span" in err


def test_integrate_gaussian(tmp_path, capsys):
    code, out, _ = run_cli(["integrate", write(tmp_path, GAUSS)], capsys=capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["Z"]["re"] == pytest.approx(math.sqrt(math.pi), rel=1e-8)
    assert abs(doc["Z"]["im"]) < 1e-12
    assert doc["Z"]["converged"] is True


def test_integrate_quartic(tmp_path, capsys):
    code, out, _ = run_cli(["integrate", write(tmp_path, QUARTIC)], capsys=capsys)
    assert code == 0
    doc = json.loads(out)
    # frozen from mpmath.quad(exp(x^2 - x^4), [-inf, inf]) at 25 digits
    assert doc["Z"]["re"] == pytest.approx(2.7613489742697402, rel=1e-8)


def test_integrate_cubic_exits_2(tmp_path, capsys):
    code, _, err = run_cli(["integrate", write(tmp_path, CUBIC)], capsys=capsys)
    assert code == 2
    assert "contour" in err


def test_integrate_reads_stdin(capsys, monkeypatch):
    code, out, _ = run_cli(
        ["integrate", "-"], stdin_text=GAUSS, capsys=capsys, monkeypatch=monkeypatch
    )
    assert code == 0
    assert json.loads(out)["Z"]["re"] == pytest.approx(math.sqrt(math.pi), rel=1e-8)


def test_integrate_malformed_exits_3(capsys, monkeypatch):
    code, _, err = run_cli(
        ["integrate", "-"], stdin_text="{bad", capsys=capsys, monkeypatch=monkeypatch
    )
    assert code == 3


def test_moments_default_and_explicit(tmp_path, capsys):
    path = write(tmp_path, GAUSS)
    code, out, _ = run_cli(["moments", path], capsys=capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["moments"]["0"]["re"] == pytest.approx(math.sqrt(math.pi), rel=1e-8)
    assert doc["moments"]["2"]["re"] == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-8)
    code, out, _ = run_cli(["moments", "--index", "4", path], capsys=capsys)
    doc = json.loads(out)
    assert doc["moments"]["4"]["re"] == pytest.approx(3 * math.sqrt(math.pi) / 4, rel=1e-8)


def test_verify_quartic_exit_0(tmp_path, capsys):
    code, out, _ = run_cli(["verify", write(tmp_path, QUARTIC)], capsys=capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "pass"
    assert "wall_time_s" not in doc


def test_verify_alpha_debug_exit_1(tmp_path, capsys):
    code, out, _ = run_cli(
        ["verify", "--debug-alpha-zero", write(tmp_path, GAUSS)], capsys=capsys
    )
    assert code == 1
    assert json.loads(out)["verdict"] == "fail"


def test_verify_cubic_exit_2(tmp_path, capsys):
    code, out, _ = run_cli(["verify", write(tmp_path, CUBIC)], capsys=capsys)
    assert code == 2
    doc = json.loads(out)
    assert doc["verdict"] == "inconclusive"
    assert "contour" in doc["error"]


def test_verify_deterministic_across_threads(tmp_path, capsys):
    path = write(tmp_path, CROSS)
    _, out1, _ = run_cli(["verify", "--threads", "1", path], capsys=capsys)
    _, out8, _ = run_cli(["verify", "--threads", "8", path], capsys=capsys)
    assert out1 == out8


def test_env_variable_overrides_default(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("GKZINT_TOL", "1e-5")
    code, out, _ = run_cli(["integrate", write(tmp_path, GAUSS)], capsys=capsys)
    assert code == 0
    # flags win over environment
    monkeypatch.setenv("GKZINT_TOL", "not-a-number")
    code, _, err = run_cli(["integrate", write(tmp_path, GAUSS)], capsys=capsys)
    assert code == 3 and "GKZINT_TOL" in err


def test_explicit_contour_flag(tmp_path, capsys):
    plus_quartic = '{"n":1,"terms":[{"k":[4],"c":[1,0]}]}'
    angles = f"{3 * math.pi / 4},{math.pi / 4}"
    code, out, _ = run_cli(
        ["integrate", "--contour", angles, write(tmp_path, plus_quartic)],
        capsys=capsys,
    )
    assert code == 0
    expected = math.sqrt(2) * math.gamma(0.25) / 4
    assert json.loads(out)["Z"]["re"] == pytest.approx(expected, rel=1e-8)


def test_bad_contour_flag_exits_3(tmp_path, capsys):
    code, _, err = run_cli(
        ["integrate", "--contour", "1.0", write(tmp_path, GAUSS)], capsys=capsys
    )
    assert code == 3


def test_selftest_passes(capsys):
    code, out, _ = run_cli(["selftest"], capsys=capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "pass"
    assert all(c["status"] == "pass" for c in doc["checks"])


def test_selftest_loose_tolerance_scales(capsys):
    code, out, _ = run_cli(["selftest", "--tol", "1e-3"], capsys=capsys)
    assert code == 0
    assert json.loads(out)["status"] == "pass"


def test_floats_printed_with_17_significant_digits(tmp_path, capsys):
    code, out, _ = run_cli(["integrate", write(tmp_path, GAUSS)], capsys=capsys)
    line = next(l for l in out.splitlines() if '"re"' in l)
    digits = line.split(":")[1].strip().rstrip(",")
    assert len(digits.replace(".", "").replace("-", "").lstrip("0")) >= 16
    # round trip is exact
    assert float(digits) == json.loads(out)["Z"]["re"]


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "gkzint.cli", "integrate", "-"],
        input=GAUSS,
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["Z"]["converged"] is True

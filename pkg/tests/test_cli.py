import csv
import io
import json
import math
import os
import subprocess
import sys
from fractions import Fraction

import mpmath
import pytest

from localfit.cli import (ApproxPayload, BlocksPayload, DetPayload, InversePayload, RemezPayload,
                          SWEEP_HEADER, emit, format_cell, main, parse_number)
from localfit.scalar import Mode


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_approx_exp_constant(capsys):
    code, out, err = run(capsys, "approx", "--function", "exp", "--x0", "0", "--epsilon", "1",
                         "--degree", "0")
    assert code == 0 and err == ""
    data = json.loads(out)
    assert data["coefficients"][0] == pytest.approx((math.e - 1 / math.e) / 2, rel=1e-15)
    assert set(data) >= {"center", "epsilon", "method", "coefficients", "residual_l2", "taylor",
                         "coef_errors"}
    assert data["perturbation_check"]["passed"]


def test_approx_rational_exact(capsys):
    code, out, _ = run(capsys, "approx", "--function", "poly:2,5", "--epsilon", "0.3",
                       "--degree", "1", "--mode", "rational")
    data = json.loads(out)
    assert code == 0
    assert data["coefficients"] == ["2", "5"] and data["epsilon"] == "3/10"
    assert data["residual_l2"] == "0"


@pytest.mark.parametrize("argv,needle", [
    (["approx", "--function", "exp", "--degree", "13"], "cap"),
    (["approx", "--function", "exp", "--mode", "rational"], "rational"),
    (["approx", "--function", "nope"], "registry"),
    (["approx", "--epsilon", "abc"], "not a number"),
    (["approx", "--function", "log1p", "--epsilon", "0.95"], "domain"),
    (["duel", "--challenger", "1,1", "--degree", "1"], "vacuous"),
    (["remez", "--mode", "rational"], "float or mp"),
])
def test_validation_errors(capsys, argv, needle):
    code, out, err = run(capsys, *argv)
    assert code != 0 and out == ""
    assert needle in err


def test_json_round_trip(capsys, tmp_path):
    cases = [
        (ApproxPayload, ["approx", "--function", "atan", "--degree", "3", "--epsilon", "0.2"]),
        (ApproxPayload, ["approx", "--function", "poly:1/3,2", "--degree", "2", "--mode", "rational"]),
        (ApproxPayload, ["approx", "--function", "sin", "--degree", "3", "--mode", "mp", "--dps", "30"]),
        (RemezPayload, ["remez", "--function", "exp", "--degree", "2", "--epsilon", "0.5"]),
        (RemezPayload, ["remez", "--function", "exp", "--degree", "1", "--mode", "mp"]),
        (DetPayload, ["matrix", "det", "--degree", "3", "--epsilon", "1/3"]),
        (BlocksPayload, ["matrix", "blocks", "--degree", "5"]),
        (InversePayload, ["matrix", "inverse", "--degree", "3"]),
    ]
    old = mpmath.mp.dps
    try:
        for cls, argv in cases:
            code, out, _ = run(capsys, *argv)
            assert code == 0
            record = cls.from_dict(json.loads(out))
            assert record.to_dict() == json.loads(out)
            again = cls.from_dict(record.to_dict())
            assert again == record
            for field, value in json.loads(out).items():
                assert record.to_dict()[field] == value
    finally:
        mpmath.mp.dps = old


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "--function", "exp", "--degree", "2")
    rows = list(csv.reader(io.StringIO(out)))
    assert tuple(rows[0]) == SWEEP_HEADER
    data = [r for r in rows[1:] if not r[0].startswith("slope_")]
    slopes = [r for r in rows[1:] if r[0].startswith("slope_")]
    assert len(data) == 30 and len(slopes) == 3
    assert float(slopes[0][2]) >= 2.8
    assert code == 0
    # bit-identical output across runs
    assert run(capsys, "sweep", "--function", "exp", "--degree", "2")[1] == out


def test_sweep_rational_zero_errors(capsys):
    code, out, _ = run(capsys, "sweep", "--function", "poly:1,2", "--degree", "1",
                       "--mode", "rational")
    rows = list(csv.DictReader(io.StringIO(out)))
    data = [r for r in rows if not r["epsilon"].startswith("slope_")]
    assert len(data) == 20 and all(r["abs_err"] == "0" for r in data)


def test_sweep_failure_rows(capsys, monkeypatch):
    from localfit import lab
    from localfit.l2 import ConditioningError
    real = lab.solve

    def flaky(f, x0, eps, k, method, mode):
        if eps < 0.002:
            raise ConditioningError("forced breakdown", k, eps, 0.0)
        return real(f, x0, eps, k, method, mode)

    monkeypatch.setattr(lab, "solve", flaky)
    code, out, _ = run(capsys, "sweep", "--degree", "1")
    rows = list(csv.DictReader(io.StringIO(out)))
    failed = [r for r in rows if r["status"].startswith("failed")]
    assert code == 1 and len(failed) == 4
    assert all(r["a_i"] == "" for r in failed)


def test_matrix(capsys):
    data = json.loads(run(capsys, "matrix", "det", "--degree", "4", "--epsilon", "1")[1])
    assert data["direct"] == data["factorization"] == data["blocks"] and data["agree"]
    data = json.loads(run(capsys, "matrix", "inverse", "--degree", "1")[1])
    assert data["alpha"][0][1] == data["alpha"][1][0] == "0" and data["parity_zero"]
    data = json.loads(run(capsys, "matrix", "blocks", "--degree", "4")[1])
    assert (data["u"], data["v"]) == (2, 3) and data["product_matches"]


def test_remez(capsys):
    data = json.loads(run(capsys, "remez", "--function", "exp", "--degree", "0")[1])
    assert data["coefficients"][0] == pytest.approx((math.e + 1 / math.e) / 2, rel=1e-14)
    data = json.loads(run(capsys, "remez", "--function", "poly:1,1", "--degree", "1")[1])
    assert data["max_error"] == 0
    old = mpmath.mp.dps
    try:
        data = json.loads(run(capsys, "remez", "--degree", "3", "--epsilon", "0.1", "--mode", "mp")[1])
    finally:
        mpmath.mp.dps = old
    assert data["equioscillation"] and data["converged"]


def test_remez_non_convergence(capsys):
    code, out, err = run(capsys, "remez", "--function", "runge", "--degree", "4",
                         "--max-iterations", "1")
    assert code != 0 and "did not converge" in err
    assert json.loads(out)["converged"] is False


def test_duel(capsys):
    code, out, _ = run(capsys, "duel", "--challenger", repr((math.e - 1 / math.e) / 2),
                       "--degree", "0", "--eps-grid", "1,0.5,0.1,0.01")
    lines = out.splitlines()
    assert lines[0] == "epsilon,err_taylor,err_challenger,winner"
    assert lines[1].startswith("1.0,") and lines[1].endswith(",challenger")
    assert lines[-1] == "threshold=0.5"
    code, out, _ = run(capsys, "duel", "--function", "poly:1,2", "--degree", "1",
                       "--challenger", "1,3", "--eps-grid", "1,0.1")
    assert all(l.endswith(",taylor") for l in out.splitlines()[1:-1])
    code, out, _ = run(capsys, "duel", "--challenger", "1.05", "--degree", "0")
    threshold = float(out.splitlines()[-1].split("=")[1])
    assert 1e-3 <= threshold <= 1


def test_output_file_atomic(capsys, tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = run(capsys, "matrix", "det", "--degree", "2", "-o", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["agree"]
    assert [p.name for p in tmp_path.iterdir()] == ["out.json"]


def test_emit_leaves_no_temp_on_failure(tmp_path, monkeypatch):
    def boom(src, dst):
        raise OSError("disk full")
    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        emit("x", str(tmp_path / "a.csv"))
    assert list(tmp_path.iterdir()) == []


def test_formatting():
    assert format_cell(Fraction(3, 7)) == "3/7"
    assert format_cell(0.1) == "0.1"
    assert format_cell(None) == ""
    assert parse_number("1/3", Mode.RATIONAL) == Fraction(1, 3)
    assert parse_number("0.3", Mode.RATIONAL) == Fraction(3, 10)
    assert parse_number("1e-3", Mode.FLOAT) == 1e-3


def test_seeded_perturbation_reproducible(capsys):
    a = run(capsys, "approx", "--function", "cos", "--degree", "2", "--seed", "7")[1]
    b = run(capsys, "approx", "--function", "cos", "--degree", "2", "--seed", "7")[1]
    assert a == b and json.loads(a)["perturbation_check"]["seed"] == 7


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "localfit.cli", "matrix", "blocks", "--degree", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["u"] == 1

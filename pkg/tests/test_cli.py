import json
import os
import subprocess
import sys

import pytest

from modpolar.cli import dumps_machine, main

ZERO = """\
name: zero
backend: finite
algebra: [2]
modules:
  E: {rank: 2}
operators:
  a:
    from: E
    to: E
    matrix: [[0, 0], [0, 0]]
requests:
  - {analysis: polar, operator: a}
  - {analysis: invariants, operator: a}
expect:
  a.polar.v_is_zero: true
"""


def _cli(*args, env=None):
    full_env = dict(os.environ, **(env or {}))
    return subprocess.run(
        [sys.executable, "-m", "modpolar.cli", *args], capture_output=True, text=True, env=full_env, check=False
    )


@pytest.fixture
def zero_file(tmp_path):
    path = tmp_path / "zero.yaml"
    path.write_text(ZERO)
    return str(path)


def test_gallery_exit_zero():
    out = _cli("gallery")
    assert out.returncode == 0, out.stdout + out.stderr
    assert "9/9 scenarios passed" in out.stdout


def test_zero_operator(zero_file):
    out = _cli("polar", zero_file, "--format", "machine")
    assert out.returncode == 0, out.stderr
    report = json.loads(out.stdout)
    assert report["schema"] == "modpolar.report/1"
    (res,) = report["results"]
    assert res["analysis"] == "polar" and res["status"] == "ok"
    assert res["verdict"]["has_v"] is True and res["verdict"]["v_is_zero"] is True
    assert report["summary"]["passed"]


def test_check_runs_all_requests(zero_file, capsys):
    assert main(["check", zero_file]) == 0
    text = capsys.readouterr().out
    assert "polar" in text and "invariants" in text and "PASS" in text


def test_failed_expectation_exit_one(tmp_path):
    path = tmp_path / "wrong.yaml"
    path.write_text(ZERO.replace("v_is_zero: true", "v_is_zero: false"))
    assert main(["check", str(path)]) == 1


def test_bad_input_exit_two(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text(ZERO.replace("[[0, 0], [0, 0]]", "[[0, 0], [0, 2+x]]"))
    assert main(["check", str(path)]) == 2
    err = capsys.readouterr().err
    assert "operators.a.matrix.1.1" in err and "line 10" in err
    assert main(["check", str(tmp_path / "missing.yaml")]) == 2
    assert main(["fuzz", "--algebra", "0"]) == 2


def test_tolerance_env(zero_file):
    out = _cli("check", zero_file, "--format", "machine", env={"MODPOLAR_TOL": "1e-6"})
    assert out.returncode == 0
    assert json.loads(out.stdout)["tol"] == 1e-6
    out = _cli("check", zero_file, "--tol", "1e-7", "--format", "machine", env={"MODPOLAR_TOL": "1e-6"})
    assert json.loads(out.stdout)["tol"] == 1e-7
    assert _cli("check", zero_file, env={"MODPOLAR_TOL": "abc"}).returncode != 0


def test_fuzz_m2_rank3():
    out = _cli("fuzz", "--seed", "1", "--count", "100", "--algebra", "2", "--rank", "3", "--format", "machine")
    assert out.returncode == 0, out.stdout[-2000:]
    report = json.loads(out.stdout)
    assert report["summary"]["passed"] == 100 and report["summary"]["all_passed"]


def test_machine_output_deterministic_and_canonical():
    a = _cli("fuzz", "--seed", "3", "--count", "10", "--format", "machine")
    b = _cli("fuzz", "--seed", "3", "--count", "10", "--format", "machine")
    assert a.stdout == b.stdout
    assert dumps_machine(json.loads(a.stdout)) == a.stdout

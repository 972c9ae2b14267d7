import subprocess
import sys

import numpy as np
import pytest

from greedylds.cli import main
from greedylds.core import read_points


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_generate_and_measure(tmp_path, capsys):
    path = tmp_path / "p.txt"
    code, _, _ = run(capsys, "generate", "--N", "5", "--out", str(path))
    assert code == 0
    assert read_points(path).coords[:, 0].tolist() == [0.5, 0.25, 5 / 6, 0.125, 0.7]
    code, out, _ = run(capsys, "measure", "--points", str(path))
    assert code == 0 and float(out) > 0


def test_generate_sobol_and_kronecker(capsys):
    code, out, _ = run(capsys, "generate", "--sequence", "sobol", "--d", "2", "--N", "4", "--skip-zero")
    assert code == 0 and out.splitlines()[-4] == "0.5 0.5"
    code, out, _ = run(capsys, "generate", "--sequence", "kronecker", "--N", "2", "--start-index", "1")
    assert out.splitlines()[-2:] == ["0.6180339887498949", "0.23606797749978981"]


def test_trace_csv_deterministic(capsys):
    args = ("trace", "--sequence", "kronecker", "--N", "3000", "--stride", "1000", "-p", "2")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b
    assert "# p=2" in a and a.splitlines()[-4] == "n,raw,scaled"


def test_compare_and_robustness(capsys, tmp_path):
    code, out, _ = run(capsys, "compare", "--a", "kronecker", "--b", "kritzinger", "--N", "2000", "--stride", "1000")
    assert code == 0 and "n,raw_a,raw_b,score_a,proportion_a" in out
    code, out, _ = run(capsys, "robustness", "--mode", "random", "--N", "2000", "--stride", "1000",
                       "--sets", "2", "--k", "3", "--seed", "9", "--traces-dir", str(tmp_path / "tr"))
    assert code == 0 and "n,min,mean,max" in out
    assert len(list((tmp_path / "tr").iterdir())) == 2


def test_nd_experiment_cli(capsys, tmp_path):
    args = ("nd-experiment", "--d", "2", "--N", "20", "--stride", "10", "--budget", "200", "--seed", "3",
            "--out-dir", str(tmp_path))
    assert run(capsys, *args)[0] == 0
    first = (tmp_path / "kritzinger.csv").read_bytes()
    assert run(capsys, *args)[0] == 0
    assert (tmp_path / "kritzinger.csv").read_bytes() == first
    assert b"# seed=3" in first and b"# budget=200" in first


def test_nlp_export_cli(tmp_path, capsys):
    pts = tmp_path / "p.txt"
    pts.write_text("0.5 0.5\n0.25 0.75\n")
    out = tmp_path / "m.txt"
    assert run(capsys, "nlp-export", "--points", str(pts), "--out", str(out))[0] == 0
    assert out.read_text().count("\n  link_") == 4


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "trace", "--N", "10", "--stride", "0")[0] == 2
    assert run(capsys, "nd-experiment", "--N", "5000")[0] == 2
    assert run(capsys, "measure", "--points", str(tmp_path / "missing.txt"))[0] == 2
    assert run(capsys, "bogus")[0] == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("0.5 1.5\n")
    code, _, err = run(capsys, "measure", "--points", str(bad))
    assert code == 2 and "outside" in err


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "greedylds.cli", "generate", "--help"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "smaller one is taken" in " ".join(res.stdout.split())

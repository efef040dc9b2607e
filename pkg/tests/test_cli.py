import io
import json
import subprocess
import sys

import pytest

from orbihqe.cli import main


def run(args):
    out = io.StringIO()
    return main(args, out=out), out.getvalue()


@pytest.fixture
def one_tau(tmp_path):
    path = tmp_path / "one.tau"
    path.write_text("# vacuum\n0 | [] | 1\n")
    return str(path)


def test_lattice_table():
    code, text = run(["lattice", "table", "--n", "6"])
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "Euler pairing, n = 6"
    assert lines[-1].endswith("checks passed")
    assert all(line.startswith("PASS") for line in lines[1:-1] if line[:4] in ("PASS", "FAIL"))


def test_rank_below_four_is_usage_error():
    assert run(["lattice", "table", "--n", "3"])[0] == 2
    assert run(["lattice", "frobnicate", "--n", "4"])[0] == 2


def test_json_records():
    code, text = run(["roots", "verify", "--n", "4", "--json"])
    assert code == 0
    recs = [json.loads(line) for line in text.splitlines()]
    assert recs and all(set(r) == {"suite", "id", "params", "status", "witness"} for r in recs)
    assert all(r["status"] == "PASS" for r in recs)


def test_hqe_exit_codes(one_tau):
    code, text = run(["hqe", "check", "--n", "4", "--tau", one_tau, "--m", "0", "--r", "0..1"])
    assert code == 0
    assert text.splitlines()[-1] == "2/2 checks passed"
    code, text = run(["hqe", "check", "--n", "4", "--tau", one_tau, "--m", "1", "--r", "1"])
    assert code == 1
    assert "witness: (NQ^2)" in text


def test_dtoda_agrees_with_hqe_on_vacuum(one_tau):
    for m in ("-1", "0", "1"):
        a = run(["hqe", "check", "--n", "4", "--tau", one_tau, f"--m={m}", "--r", "0..1", "--json"])
        b = run(["dtoda", "check", "--n", "4", "--tau", one_tau, f"--m={m}", "--r", "0..1", "--json"])
        assert a[0] == b[0]
        sa = [json.loads(x)["status"] for x in a[1].splitlines()]
        sb = [json.loads(x)["status"] for x in b[1].splitlines()]
        assert sa == sb


def test_parse_error_position(tmp_path, capsys):
    path = tmp_path / "bad.tau"
    path.write_text("0 | [] | 1\n0 | [] | one\n")
    code, _ = run(["hqe", "check", "--n", "4", "--tau", str(path)])
    assert code == 3
    assert f"{path}:2:10: parse error" in capsys.readouterr().err


def test_thread_variable_validated(monkeypatch):
    monkeypatch.setenv("ORBIHQE_THREADS", "zero")
    assert run(["identities", "all", "--n", "4", "--suite", "lattice"])[0] == 2


def test_output_is_stable(monkeypatch):
    args = ["identities", "all", "--n", "4", "--suite", "btilde"]
    first = run(args)
    monkeypatch.setenv("ORBIHQE_THREADS", "2")
    assert run(args) == first
    assert first[0] == 0


def test_periods_dump_and_phase():
    code, text = run(["periods", "dump", "--n", "4", "--alpha", "e1_1", "--m", "0"])
    assert code == 0 and "phi01: (1/2)*lam^-1" in text
    assert run(["phase", "check", "--n", "4", "--order", "6"])[0] == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "orbihqe", "lattice", "table", "--n", "4"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("Euler pairing, n = 4\n")

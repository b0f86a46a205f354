import json
import subprocess
import sys

import pytest

from conftest import data_path
from hampack.cli import EXIT_BUDGET, EXIT_FAIL, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(out):
    # the JSON document precedes the one-line summary
    return json.loads(out[:out.rindex("}") + 1])


def test_solve(capsys):
    code, out, _ = run(capsys, "solve", "--space", "2^4,3^1", "-d", "3", "--threads", "1")
    assert code == EXIT_OK
    doc = report(out)
    assert doc["value"] == 6 and doc["status"] == "optimal" and len(doc["witness"]) == 6
    assert set(doc) == {"status", "value", "bound", "witness", "elapsed", "nodes"}


def test_solve_forced(capsys):
    code, out, _ = run(capsys, "solve", "--space", "2^4,3^1", "-d", "3", "--force",
                       "00000,00111", "--threads", "1")
    assert code == EXIT_OK and report(out)["value"] == 4


def test_solve_forced_infeasible(capsys):
    code, _, _ = run(capsys, "solve", "--space", "2^4,3^1", "-d", "3", "--force", "00000,00001")
    assert code == EXIT_FAIL


def test_solve_large_d(capsys):
    code, out, _ = run(capsys, "solve", "--space", "2^1", "-d", "5")
    assert code == EXIT_OK and report(out)["value"] == 1


def test_solve_budget_exit(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, _, _ = run(capsys, "solve", "--space", "2^7,3^1", "-d", "3", "--nodes", "200",
                     "--threads", "1", "--json", str(path))
    assert code == EXIT_BUDGET
    assert json.loads(path.read_text())["status"] == "budget_exhausted"


def test_unbounded_flag_parses(capsys):
    code, out, _ = run(capsys, "solve", "--space", "2^3,3^1", "-d", "3", "--unbounded",
                       "--threads", "1")
    assert code == EXIT_OK and report(out)["status"] == "optimal"


@pytest.mark.parametrize("argv", [
    ["solve", "--space", "2^x", "-d", "3"],
    ["solve", "--space", "3^1,2^4", "-d", "3"],
    ["solve", "--space", "2^4,3^1", "-d", "3", "--force", "0000"],
    ["emit", "--space", "2^2", "-d", "2", "--model", "pair"],
    ["audit", "--space", "2^4,3^1", "-d", "3", "--profile", "1", "--known-lower", "2"],
    ["bounds", "--rules", "ii,zz"],
    ["frobnicate"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USAGE
    assert err


def test_word_diagnostic(capsys):
    _, _, err = run(capsys, "solve", "--space", "2^4,3^1", "-d", "3", "--force", "00300")
    assert "position" in err


def test_emit_pair(capsys, tmp_path):
    path = tmp_path / "pair.lp"
    argv = ["emit", "--space", "2^7,3^1", "-d", "3", "--model", "pair", "--second", "00000111",
            "-o", str(path)]
    code, _, err = run(capsys, *argv)
    assert code == EXIT_OK and "300 binary variables" in err
    first = path.read_bytes()
    binaries = first.decode().split("Binary")[1].split("End")[0].split()
    assert len(binaries) == 300
    run(capsys, *argv)
    assert path.read_bytes() == first


def test_emit_small_full(capsys):
    code, out, err = run(capsys, "emit", "--space", "2^2", "-d", "2", "--model", "full")
    assert code == EXIT_OK and "4 binary variables, 4 conflict rows" in err
    assert "Maximize" in out


def test_emit_mps_forbid(capsys, tmp_path):
    path = tmp_path / "f.mps"
    code, _, _ = run(capsys, "emit", "--space", "2^7,3^1", "-d", "3", "--model", "forbid",
                     "--profile", "0,3", "--format", "mps", "-o", str(path))
    assert code == EXIT_OK and path.read_text().startswith("*")


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--space", "2^7,3^1", "-d", "3", "--code",
                       str(data_path("code_7_1_3.txt")))
    assert code == EXIT_OK and "PASS: 26 words" in out
    code, out, _ = run(capsys, "verify", "--space", "2^7,3^1", "-d", "4", "--code",
                       str(data_path("code_7_1_3.txt")))
    assert code == EXIT_FAIL


def test_connectify(capsys, tmp_path):
    src = tmp_path / "c.txt"
    src.write_text("00000\n11111\n")
    out_path = tmp_path / "o.txt"
    code, out, _ = run(capsys, "--seed", "3", "connectify", "--space", "2^5", "-d", "3",
                       "--code", str(src), "-o", str(out_path))
    assert code == EXIT_OK and "connected: True" in out


def test_branches(capsys):
    code, out, _ = run(capsys, "branches", "--space", "2^3,3^2", "-d", "4")
    assert code == EXIT_OK and len(out.splitlines()) == 2


def test_audit(capsys):
    code, out, _ = run(capsys, "audit", "--space", "2^7,3^1", "-d", "3", "--profile", "0,3",
                       "--known-lower", "26", "--threads", "1")
    assert code == EXIT_OK and json.loads(out)["verdict"] == "branch_unavoidable"


def test_bounds(capsys, tmp_path):
    ledger = tmp_path / "ledger.txt"
    code, out, _ = run(capsys, "bounds", "--anchors", str(data_path("anchors.txt")),
                       "--rules", "ii,iv,vi", "-o", str(ledger))
    assert code == EXIT_OK and "FAIL" not in out
    assert out.count("PASS") == 23
    assert "2,3 10,1 3 1 208 ii:9,1;3" in ledger.read_text()


def test_bounds_missing_rule_fails(capsys):
    code, out, _ = run(capsys, "bounds", "--rules", "ii")
    assert code == EXIT_FAIL and "FAIL" in out


def test_tables(capsys, tmp_path):
    path = tmp_path / "t.json"
    code, out, _ = run(capsys, "tables", "--json", str(path))
    assert code == EXIT_OK and "83/83 cells match" in out
    assert all(c["ok"] for c in json.loads(path.read_text()))


def test_console_script_module():
    proc = subprocess.run([sys.executable, "-m", "hampack.cli", "branches", "--space", "2^4,3^1",
                           "-d", "3"], capture_output=True, text=True)
    assert proc.returncode == 0 and "00111" in proc.stdout

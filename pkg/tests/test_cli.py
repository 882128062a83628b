import json
import subprocess
import sys

import pytest

from reflect_kernel import cli, suites


def run(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_homs_row_counts(capsys):
    for n, rows in ((3, 2), (4, 4), (5, 2), (6, 4)):
        code, out, _ = run(capsys, "homs", "--family", "dihedral", "--n", str(n))
        assert code == 0
        assert len(out.strip().splitlines()) == rows + 1
    code, out, _ = run(capsys, "homs", "--family", "orthogonal", "--d", "3", "--format", "json")
    assert code == 0 and len(json.loads(out)) == 8


def test_kernel_example_value(capsys):
    code, out, _ = run(capsys, "kernel", "--family", "dihedral", "--n", "4", "--character", "sgn",
                       "--t", "0.5", "--x", "1.0,0.2", "--y", "0.8,0.3")
    assert code == 0
    from reflect_kernel import dihedral_heat
    assert float(out.strip().splitlines()[-1].split(",")[-1]) == pytest.approx(
        dihedral_heat("D", 4, 0.5, [1.0, 0.2], [0.8, 0.3]), rel=1e-12)


def test_group_dump(capsys, tmp_path):
    code, out, _ = run(capsys, "group", "--family", "dihedral", "--n", "3")
    assert code == 0 and len(out.strip().splitlines()) == 7
    path = tmp_path / "sys.json"
    path.write_text(json.dumps({"family": "orthogonal", "d": 2}))
    code, out, _ = run(capsys, "group", "--system", str(path), "--format", "json")
    assert code == 0 and len(json.loads(out)) == 4


def test_malformed_json_reports_position(capsys):
    code, _, err = run(capsys, "group", "--system", '{"family": "dihedral",\n "n": }')
    assert code == 2
    assert "line 2" in err and "column" in err


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["homs", "--family", "dihedral", "--n", "3", "--character", "eta1"],
    ["kernel", "--family", "dihedral", "--n", "3", "--character", "eta1", "--t", "1", "--x", "1,0", "--y", "1,0"],
    ["group"],
    ["grid", "--family", "dihedral", "--n", "4", "--t", "1", "--y", "1,0.1", "--grid", "hex:1"],
    ["verify", "--suite", "nope"],
    ["homs", "--family", "dihedral", "--n", "4", "--threads", "0"],
])
def test_configuration_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_grid_csv_is_reproducible(capsys, tmp_path):
    argv = ["grid", "--family", "dihedral", "--n", "6", "--character", "sgn", "--t", "0.3",
            "--y", "1.0,0.2", "--grid", "polar:0.2:2:5:4"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, *argv, "--output", str(a))[0] == 0
    assert run(capsys, *argv, "--output", str(b), "--threads", "3")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().strip().splitlines()) > 20


def test_solve_constant_datum(capsys):
    code, out, _ = run(capsys, "solve", "--family", "orthogonal", "--d", "2", "--t", "0.2", "--f", "one",
                       "--grid", "tensor:0.2:1.5:3", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["metadata"]["f"] == "one"
    vals = doc["values"]
    assert len(vals) == 9 and all(abs(v - 1) < 1e-10 for v in vals)


def test_seed_comes_from_environment(capsys, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "17")
    code, out, _ = run(capsys, "verify", "--suite", "bessel")
    assert code == 0 and json.loads(out)["seed"] == 17
    code, out, _ = run(capsys, "verify", "--suite", "bessel", "--seed", "4")
    assert json.loads(out)["seed"] == 4
    monkeypatch.setenv(cli.SEED_ENV, "x")
    assert run(capsys, "verify", "--suite", "bessel")[0] == 2


def test_verify_report(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "cj-cross", "--n", "4", "--count", "5")
    doc = json.loads(out)
    assert code == 0 and doc["pass"] and doc["suites"] == ["cj-cross"]
    assert all(e["suite"] == "cj-cross" for e in doc["results"])


def test_failing_suite_exits_1(capsys, monkeypatch):
    def bad(seed=0):
        return [suites.entry("always-off", {}, 1.0, 0.5, False)]

    monkeypatch.setitem(suites.CHECK_SUITES, "bad", bad)
    code, out, _ = run(capsys, "checks", "--suite", "bad")
    assert code == 1 and json.loads(out)["pass"] is False


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "reflect_kernel", "homs", "--family", "dihedral", "--n", "5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and len(proc.stdout.strip().splitlines()) == 3

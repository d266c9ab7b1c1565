import json
import subprocess
import sys

import numpy as np
import pytest

from jordantri import cli
from jordantri.cli import instance_dict


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


@pytest.fixture
def hidden_file(tmp_path, capsys):
    path = tmp_path / "inst.json"
    assert cli.main(["gen-random", "--seed", "1", "--n", "6", "--k", "3", "--out", str(path)]) == 0
    capsys.readouterr()
    return str(path)


def test_gen_random_writes_instance(capsys):
    code, out, _ = run(capsys, "gen-random", "--seed", "1", "--n", "3", "--k", "2")
    obj = json.loads(out)
    assert code == 0 and obj["schema_version"] == 1 and obj["dim"] == 3
    assert len(obj["generators"]) == 2
    assert obj["metadata"]["seed"] == 1 and "hidden_conjugator" in obj["metadata"]


def test_gen_random_is_byte_identical(capsys):
    a = run(capsys, "gen-random", "--seed", "1", "--n", "4", "--k", "2")[1]
    b = run(capsys, "gen-random", "--seed", "1", "--n", "4", "--k", "2")[1]
    assert a == b


def test_gen_random_rejects_bad_parameters(capsys):
    code, _ = run_json(capsys, "gen-random", "--n", "1", "--k", "1")
    assert code != 0


def test_triangularize_hidden(capsys, hidden_file):
    code, rep = run_json(capsys, "triangularize", hidden_file)
    assert code == 0 and rep["status"] == "pass"
    assert rep["result"]["residual"] < 1e-8
    assert rep["result"]["chain_dims"] == list(range(7))


def test_verify_all_canned(capsys):
    code, rep = run_json(capsys, "verify-all", "@e12-e23")
    assert code == 0
    assert all(s["status"] == "pass" for s in rep["result"]["sections"].values())


def test_verify_all_text_summary(capsys):
    code, out, _ = run(capsys, "verify-all", "@e12-e23")
    assert code == 0 and out.startswith("verify-all: pass")


def test_check_traces_non_nilpotent_exit_2(tmp_path, capsys):
    path = tmp_path / "diag.json"
    path.write_text(json.dumps(instance_dict([np.diag([1.0, 0.0])])))
    code, rep = run_json(capsys, "check-traces", str(path))
    assert code == 2 and rep["status"] == "hypothesis_violation"


def test_stalled_pair(capsys):
    assert run_json(capsys, "triangularize", "@e12-e21")[0] == 2
    assert run_json(capsys, "verify-all", "@e12-e21")[0] == 2
    code, rep = run_json(capsys, "reduce", "@e12-e21")
    assert code == 0 and rep["result"]["reducible"] is False


def test_cartan_reports_violated_hypothesis(capsys):
    code, rep = run_json(capsys, "cartan", "@e12-e21")
    assert code == 2 and "hypothesis violated" in rep["result"]["criterion"]["notes"]
    assert run_json(capsys, "cartan", "@e12-e23")[0] == 0


@pytest.mark.parametrize("argv", [
    ["close", "--kind", "jordan"], ["close", "--kind", "lie"], ["close", "--kind", "assoc"],
    ["lie"], ["ideal", "--elements", "0,1"], ["check-traces", "--with-ideal"],
    ["check-identities"], ["riesz"], ["adproj"], ["reduce"],
])
def test_subcommands_pass_on_hidden_instance(capsys, hidden_file, argv):
    code, rep = run_json(capsys, argv[0], hidden_file, *argv[1:])
    assert code == 0, rep
    assert all(c["pass"] for c in rep["checks"])


def test_close_dimensions(capsys):
    code, rep = run_json(capsys, "close", "@e12-e23", "--kind", "jordan")
    assert code == 0 and rep["result"]["dim"] == 3


def test_adproj_not_in_spectrum(capsys):
    code, rep = run_json(capsys, "adproj", "@e12-e23", "--lambda", "1+2i")
    assert code == 2 and rep["result"]["error"] == "NotInSpectrum"


def test_io_errors(tmp_path, capsys):
    code, out, err = run(capsys, "triangularize", str(tmp_path / "missing.json"))
    assert code == 4 and "cannot read" in err
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "triangularize", str(bad))[0] == 4
    bad.write_text(json.dumps({"schema_version": 2, "dim": 2, "generators": []}))
    assert run(capsys, "triangularize", str(bad))[0] == 4
    assert run(capsys, "triangularize", "@nope")[0] == 4


def test_tolerance_flags_are_used(capsys):
    code, rep = run_json(capsys, "triangularize", "@e12-e23", "--tol-residual", "1e-3")
    assert code == 0
    assert run(capsys, "triangularize", "@e12-e23", "--tol-rank", "-1")[0] == 4


def test_stdin_instance(monkeypatch, capsys):
    import io
    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(cli.builtin_instance("e12-e23"))))
    assert run_json(capsys, "reduce", "-")[0] == 0


def test_reports_are_byte_identical_across_processes(hidden_file):
    cmd = [sys.executable, "-m", "jordantri.cli", "verify-all", hidden_file, "--json"]
    a = subprocess.run(cmd, capture_output=True, check=False)
    b = subprocess.run(cmd, capture_output=True, check=False)
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout and a.stdout

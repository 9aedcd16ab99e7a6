import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from choiceless_lab.cli import main

SCHEMA = json.loads(resources.files("choiceless_lab").joinpath("schema/report.schema.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    return code, doc


def test_count_k5(capsys):
    code, doc = run_json(capsys, "count", "--kinds", "all", "--k", "5")
    assert code == 0
    (row,) = doc["result"]["rows"]
    assert [row["counts"][k] for k in ("upair", "opair", "fin", "iseq")] == [10, 25, 32, 326]
    assert row["chain"] == "strict chain holds"


def test_count_k4_chain_fails(capsys):
    _, doc = run_json(capsys, "count", "--k", "4")
    assert doc["result"]["rows"][0]["chain"] == "strict chain fails"


def test_count_text_is_projection(capsys):
    code, out = run(capsys, "count", "--k", "5", "--format", "text")
    assert code == 0 and "strict chain holds" in out and "326" in out


def test_usage_errors(capsys):
    assert main(["witness", "lemma-n", "--n", "0"]) == 64
    with pytest.raises(SystemExit) as info:
        main(["verify", "--model", "nope"])
    assert info.value.code == 64
    with pytest.raises(SystemExit) as info:
        main(["count", "--seed", str(2**64)])
    assert info.value.code == 64


@pytest.mark.parametrize("procedure", ["lemma-n", "lemma-c", "fin-to-one"])
def test_witness_documents(capsys, procedure):
    code, doc = run_json(capsys, "witness", procedure, "--seed", "5")
    assert code == 0
    assert doc["seed"] == 5 and doc["config"]["seed"] == 5


def test_verify_rc_exit_zero(capsys):
    code, doc = run_json(capsys, "verify", "--model", "rc", "--triples", "4", "--format", "json")
    assert code == 0
    assert isinstance(doc, list) and len(doc) == 7
    assert all(r["outcome"] == "verified" for r in doc)
    assert all(r["bounds"]["config"]["seed"] == 0 for r in doc)


def test_verify_rz_inconclusive(capsys):
    code, doc = run_json(capsys, "verify", "--model", "rz")
    assert code == 2
    assert any(r["outcome"] == "inconclusive-truncation" for r in doc)


def test_orbit_and_model_build(capsys):
    code, doc = run_json(capsys, "orbit", "--model", "rc", "--triples", "1",
                         "--object", '["pair", {"tag": "rc", "payload": {"triple": 0, "pos": "a"}},'
                                     ' {"tag": "rc", "payload": {"triple": 0, "pos": "b"}}]')
    assert code == 0 and doc["result"]["size"] == 3
    code, doc = run_json(capsys, "model-build", "--model", "rn", "--k", "1", "--stages", "1")
    assert code == 0 and doc["result"]["atoms"] == 5


def test_out_file(tmp_path, capsys):
    target = tmp_path / "count.json"
    assert main(["count", "--k", "5", "--out", str(target)]) == 0
    assert json.loads(target.read_text())["command"] == "count"


def test_byte_identical_subprocess_runs():
    cmd = [sys.executable, "-m", "choiceless_lab", "witness", "lemma-c", "--seed", "123"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second


def test_timing_is_opt_in(capsys):
    _, doc = run_json(capsys, "count", "--k", "5")
    assert "runtime_s" not in doc
    _, doc = run_json(capsys, "count", "--k", "5", "--timing")
    assert doc["runtime_s"] >= 0

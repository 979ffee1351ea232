import json
import os

import pytest

from cayleyflows import cli
from cayleyflows.geodesic import GeodesicResult
from cayleyflows.tower import GroupSpec, deserialize, from_word, serialize
from cayleyflows.words import parse


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, "--json", *argv)
    assert code == 0, err
    assert out.endswith("\n") and out.count("\n") == 1
    doc = json.loads(out)
    # byte-exact round trip through the documented compact, key-sorted form
    assert cli._dump(doc) + "\n" == out
    return doc


def test_reduce(capsys):
    assert run_json(capsys, "reduce", "aAbBa^3")["reduced"] == "aaa"
    assert run_json(capsys, "reduce", "(a b^-1)^2")["reduced"] == "aBaB"
    doc = run_json(capsys, "reduce", "Aba")
    assert doc == {"cyclic": "b", "length": 3, "reduced": "Aba"}


def test_eq(capsys):
    assert run_json(capsys, "eq", "ABab", "1", "--m", "2", "--d", "1")["equal"] is True
    assert run_json(capsys, "eq", "ABab", "1")["equal"] is False
    code, out, _ = run(capsys, "eq", "ABab", "1", "--m", "2", "--d", "1")
    assert code == 0 and out.strip() == "equal"


def test_length_json_round_trips(capsys):
    doc = run_json(capsys, "length", "bbaBaBBABAAbAbbabaBB", "--oracle-radius", "6")
    assert doc["length"] == 20 and doc["N"] == 16 and doc["conn"] == 2
    assert doc["oracle"] is None  # beyond the search radius
    res = GeodesicResult(doc["length"], doc["N"], doc["conn"], parse(doc["witness"]))
    assert {k: v for k, v in doc.items() if k != "oracle"} == res.to_dict()
    assert len(parse(doc["witness"])) == 20


def test_length_oracle_agrees(capsys):
    doc = run_json(capsys, "length", "aabABAb", "--oracle-radius", "8")
    assert doc["oracle"] == doc["length"]


def test_example(capsys):
    doc = run_json(capsys, "example")
    assert doc["length"] == 20
    assert set(doc["step1"].values()) == {19} and len(doc["step1"]) == 4
    assert set(doc["step2"].values()) == {18} and len(doc["step2"]) == 12
    assert doc["abA"] == 19
    assert doc["depth"]["strict_depth"] == 2
    assert doc["depth"]["limiting_length"] == 19
    code, out, _ = run(capsys, "example")
    assert "|g| = 20" in out and "strict depth: 2" in out


def test_depth_modes(capsys):
    doc = run_json(capsys, "depth", "bbaBaBBABAAbAbbabaBB", "--max-k", "4")
    assert doc["strict_depth"] == 2 and doc["chain"][0] == {"k": 1, "lengths": [19]}
    doc = run_json(capsys, "depth", "bbaBaBBABAAbAbbabaBB", "--nonstrict", "--max-k", "3")
    assert doc["nonstrict_depth"] >= 2
    assert run(capsys, "depth", "a", "--strict", "--nonstrict")[0] == 2


def test_relation(capsys):
    doc = run_json(capsys, "relation", "--m", "2", "--d", "2", "--max-len", "14")
    assert doc["rho"] == 14 and doc["witnesses"] == ["aabABAbaaBAbAB"]
    assert doc["recursion_ok"] is True
    doc = run_json(capsys, "relation", "--d", "2", "--max-len", "12")
    assert doc["rho"] is None and doc["lower_bound"] == 13


def test_construct_inline_and_file(capsys, tmp_path):
    doc = run_json(capsys, "construct", "--m", "2", "--d", "2", "--k", "1", "--verify")
    assert doc["certificate"]["valid"] and doc["verified"]
    x = deserialize(json.dumps(doc["element"]))
    assert serialize(x) == cli._dump(doc["element"])
    out = tmp_path / "x.json"
    doc2 = run_json(capsys, "construct", "--d", "2", "--k", "1", "--out", str(out))
    assert doc2["element"] is None and doc2["hash"] == doc["hash"]
    assert deserialize(out.read_text()) == x


def test_growth_and_saw_csv(capsys):
    code, out, _ = run(capsys, "growth", "--n", "3")
    assert code == 0
    assert out.splitlines()[:3] == ["n,count,nth_root", "0,1,", "1,5,5.000000000000"]
    code, out, _ = run(capsys, "saw", "--n", "4")
    lines = out.splitlines()
    assert lines[1:5] == ["1,4,4.000000000000", "2,12,3.464101615138", "3,36,3.301927248895",
                          "4,100,3.162277660168"]
    assert lines[-1].startswith("#") and "2.63815853034" in lines[-1]


@pytest.mark.parametrize("argv", [
    ("saw", "--n", "9"),
    ("growth", "--n", "5", "--d", "2"),
    ("growth", "--n", "4", "--d", "3"),
])
def test_threads_do_not_change_output(capsys, argv):
    outs = {run_json(capsys, "--threads", str(t), *argv).__repr__() for t in (1, 2, 4)}
    assert len(outs) == 1


def test_cache_dir_resume(capsys, tmp_path):
    a = run_json(capsys, "--cache-dir", str(tmp_path), "growth", "--n", "4")
    assert sorted(os.listdir(tmp_path))[0].startswith("ball-v1-m2-d2-r0")
    b = run_json(capsys, "--cache-dir", str(tmp_path), "growth", "--n", "5")
    assert b["counts"][:5] == a["counts"]


def test_cache_env_override(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("CAYLEYFLOWS_CACHE", str(tmp_path))
    run_json(capsys, "growth", "--n", "2")
    assert any(name.startswith("ball-") for name in os.listdir(tmp_path))


def test_exit_codes(capsys, tmp_path):
    assert run(capsys)[0] == 2
    assert run(capsys, "nosuch")[0] == 2
    assert run(capsys, "reduce", "a%b")[0] == 2
    assert run(capsys, "eq", "a", "b", "--m", "1")[0] == 2
    assert run(capsys, "construct", "--d", "1")[0] == 2
    assert run(capsys, "--threads", "0", "saw")[0] == 2
    assert run(capsys, "saw", "--n", "40")[0] == 3
    assert run(capsys, "--mem-limit", "1", "growth", "--n", "9")[0] == 3
    assert run(capsys, "length", "abAB", "--d", "3")[0] == 3


def test_invariant_violation_writes_repro(capsys, tmp_path):
    code, _, err = run(capsys, "--cache-dir", str(tmp_path), "construct", "--d", "2", "--k", "1",
                       "--multipliers", "unit")
    assert code == 1 and "reproduction written" in err
    files = [f for f in os.listdir(tmp_path) if f.startswith("cayleyflows-repro-")]
    doc = json.loads((tmp_path / files[0]).read_text())
    assert doc["argv"][-1] == "unit" and "cancelled" in doc["error"]


def test_truncated_growth_is_partial(capsys):
    code, out, _ = run(capsys, "--json", "--mem-limit", "1", "growth", "--n", "9")
    doc = json.loads(out)
    assert code == 3 and doc["truncated"] and doc["counts"][:3] == [1, 5, 17]


def test_construct_guards_element_size(capsys, tmp_path):
    out = tmp_path / "x.json"
    code, stdout, _ = run(capsys, "--json", "construct", "--d", "2", "--k", "1", "--out", str(out),
                          "--max-bytes", "0")
    doc = json.loads(stdout)
    assert code == 3 and not out.exists()
    assert doc["certificate"]["valid"] and "element_omitted" in doc and doc["element"] is None
    assert cli._estimated_bytes(from_word("abAB", GroupSpec(2, 2))) > 0

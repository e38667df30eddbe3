from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest

from perfnet.cli import run
from perfnet.network import generate, load_network

import reference


def call(argv, stdin=None, monkeypatch=None, capsys=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def pipe(*commands):
    data = None
    for cmd in commands:
        proc = subprocess.run([sys.executable, "-m", "perfnet", *cmd], input=data, capture_output=True, text=True, check=True)
        data = proc.stdout
    return data


def test_gen_measure_golden_pipeline():
    assert pipe(["gen", "fig1"], ["measure"]) == (reference.GOLDEN / "fig1_measure.txt").read_text()


def test_gen_grassmannian_golden_pipeline():
    assert pipe(["gen", "g24"], ["grassmannian"]) == (reference.GOLDEN / "g24_grassmannian.txt").read_text()


@pytest.mark.parametrize("name", ["fig1", "fig1w", "g24", "white", "generic3"])
def test_gen_roundtrip(name, capsys):
    assert run(["gen", name]) == 0
    text = capsys.readouterr().out
    assert load_network(text).dumps() + "\n" == text


def test_gen_list_and_unknown(capsys):
    assert run(["gen", "--list"]) == 0
    assert "fig1" in capsys.readouterr().out.split()
    assert run(["gen", "nosuch"]) == 2
    assert "unknown network" in capsys.readouterr().err


def test_measure_from_file_and_labelled(tmp_path, capsys):
    f = tmp_path / "g.json"
    f.write_text(generate("g24").dumps())
    assert run(["measure", str(f), "--labelled"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("M(1,2) = ")
    assert len(lines) == 4


def test_measure_stdin(monkeypatch, capsys):
    code, out, _ = call(["measure", "-"], generate("fig1").dumps(), monkeypatch, capsys)
    assert code == 0 and out == (reference.GOLDEN / "fig1_measure.txt").read_text()


def test_invalid_input_exits_nonzero(monkeypatch, capsys, tmp_path):
    code, _, err = call(["measure"], "{", monkeypatch, capsys)
    assert code == 2 and "<stdin>" in err
    doc = json.loads(generate("white").dumps())
    doc["internal"][0]["color"] = "black"
    code, out, _ = call(["validate"], json.dumps(doc), monkeypatch, capsys)
    assert code == 1 and "invalid" in out
    code, _, err = call(["measure"], json.dumps(doc), monkeypatch, capsys)
    assert code == 2 and "invalid network" in err
    assert run(["measure", str(tmp_path / "missing.json")]) == 2


def test_validate_ok(capsys):
    assert run(["validate", "--net", "hex", "--net-args", "2", "3"]) == 0
    assert capsys.readouterr().out.strip() == "valid"


def test_faces_output(capsys):
    assert run(["faces", "--net", "g24"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[-1] == "product = 1"
    assert sum(" bounded " in ln for ln in lines) == 1
    assert any(ln.endswith("y = w2*w4*w5*w7") for ln in lines)


def test_dual_and_plucker(capsys):
    assert run(["dual", "--net", "g24"]) == 0
    assert "weight alpha - beta" in capsys.readouterr().out
    assert run(["plucker", "--net", "g24", "--check"]) == 0
    out = capsys.readouterr().out
    assert "x[1, 3] = 1" in out and out.rstrip().endswith("PASS")


def test_bracket(capsys):
    assert run(["bracket", "--net", "g24", "--entries", "1", "2", "3", "4"]) == 0
    assert run(["bracket", "--net", "g24", "--entries", "1", "9", "3", "4"]) == 2


def test_verify_psme_named(capsys):
    assert run(["verify-psme", "--net", "fig1", "--alpha", "a", "--beta", "b"]) == 0
    assert capsys.readouterr().out.rstrip().endswith("PASS")
    assert run(["verify-psme", "--net", "g24", "--six"]) == 0


def test_verify_psme_corpus_json_and_jobs(capsys):
    assert run(["--format", "json", "verify-psme", "--random", "2"]) == 0
    serial = json.loads(capsys.readouterr().out)
    assert run(["verify-psme", "--random", "2", "--jobs", "2", "--format", "json"]) == 0
    parallel = json.loads(capsys.readouterr().out)
    assert serial == parallel
    assert all(r["status"] == "PASS" for r in serial)
    keys = [(r["check-id"], r["instance"]) for r in serial]
    assert keys == sorted(keys)


def test_verify_mcybe(capsys):
    assert run(["verify-mcybe", "--k", "2", "3", "--trials", "10"]) == 0
    assert run(["verify-mcybe", "--k", "2", "--trials", "10", "--alpha", "3", "--beta", "0"]) == 1
    assert run(["verify-mcybe", "--k", "2", "--trials", "10", "--alpha", "3", "--beta", "0", "--scaled"]) == 0


def test_verify_jacobi(capsys):
    assert run(["verify-jacobi", "--n", "4", "--s-identities", "--jobs", "2"]) == 0
    out = capsys.readouterr().out
    assert "PASS jacobi-IJ (14/14)" in out


def test_cluster_compat(capsys):
    assert run(["cluster-compat", "2", "3"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("B~ =")
    assert "factor = -alpha + beta" in out
    assert "PASS compat-proportional" in out


def test_concat(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text(generate("eminus", ["3", "2"]).dumps())
    b.write_text(generate("eplus", ["3", "3"]).dumps())
    assert run(["concat", str(a), str(b), "--check"]) == 0
    assert run(["concat", str(a), str(b)]) == 0
    capsys.readouterr()
    c = tmp_path / "c.json"
    c.write_text(generate("eminus", ["2", "2"]).dumps())
    assert run(["concat", str(a), str(c)]) == 2


def test_global_flags_after_subcommand(capsys):
    assert run(["gen", "random", "5", "--seed", "4"]) == 0
    first = capsys.readouterr().out
    assert run(["--seed", "4", "gen", "random", "5"]) == 0
    assert capsys.readouterr().out == first

import json

import jsonschema
import pytest

from consensus_abstraction.cli import main
from consensus_abstraction.graph import read_edgelist
from consensus_abstraction.reporting import load_schema


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def validate(kind, text):
    doc = json.loads(text)
    jsonschema.validate(doc, load_schema(kind))
    return doc


@pytest.fixture
def gnm(tmp_path, capsys):
    path = tmp_path / "g.txt"
    code, _, _ = run(capsys, "generate", "gnm", "--n", "40", "--m", "300", "--seed", "3", "--out", str(path))
    assert code == 0
    return path


def test_generate_families(tmp_path, capsys):
    for kind, extra, m in [("two-cut", ["--half", "20", "--links", "100"], 201),
                           ("complete", ["--n", "6"], 15),
                           ("ring", ["--n", "12", "--k", "2"], 24)]:
        path = tmp_path / f"{kind}.txt"
        code, _, err = run(capsys, "generate", kind, *extra, "--seed", "7", "--out", str(path))
        assert code == 0 and f"m={m}" in err
        g, _ = read_edgelist(path)
        assert g.m == m


def test_measure_report(gnm, capsys):
    code, out, _ = run(capsys, "measure", str(gnm))
    assert code == 0
    doc = validate("measure", out)
    assert len(doc["measures"]) == 14
    code, out, _ = run(capsys, "measure", str(gnm), "--measures", "h2", "zeta:2", "--format", "csv")
    assert out.splitlines()[0] == "name,value,order,normalized"
    assert len(out.splitlines()) == 3


def test_abstract_certifies(gnm, tmp_path, capsys):
    sub = tmp_path / "s.txt"
    code, out, _ = run(capsys, "abstract", str(gnm), "--epsilon", "0.5", "--seed", "1",
                       "--abstract-out", str(sub))
    assert code == 0
    doc = validate("abstraction", out)
    assert doc["certified"] and doc["epsilon_certified"] <= 0.5
    code, out, _ = run(capsys, "verify", str(gnm), str(sub))
    assert code == 0
    ver = validate("verify", out)
    assert ver["epsilon_certified"] == pytest.approx(doc["epsilon_certified"], abs=1e-12)
    assert ver["subset"] and ver["losses_within_epsilon"] and ver["bound_chain_holds"]


def test_abstract_uncertified_exit_code(gnm, capsys):
    code, out, _ = run(capsys, "abstract", str(gnm), "--epsilon", "0.2", "--d", "1", "--retries", "2")
    assert code == 2
    assert not validate("abstraction", out)["certified"]


def test_abstract_deterministic_across_threads(gnm, tmp_path, capsys):
    outs = []
    for t in ("1", "4"):
        path = tmp_path / f"r{t}.json"
        assert run(capsys, "abstract", str(gnm), "--epsilon", "0.5", "--seed", "5",
                   "--threads", t, "--out", str(path))[0] == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_usage_errors(gnm, tmp_path, capsys):
    assert run(capsys, "abstract", str(gnm), "--epsilon", "0")[0] == 1
    assert run(capsys, "abstract", str(gnm), "--epsilon", "1.5")[0] == 1
    assert run(capsys, "measure", str(tmp_path / "missing.txt"))[0] == 1
    assert run(capsys, "measure", str(gnm), "--measures", "bogus")[0] == 1
    assert run(capsys, "nonsense")[0] == 1
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1 -2.0\n")
    assert run(capsys, "measure", str(bad))[0] == 1
    cut = tmp_path / "cut.txt"
    cut.write_text("0 1 1\n2 3 1\n")
    assert run(capsys, "measure", str(cut))[0] == 1


def test_partition_abstract(tmp_path, capsys):
    n = 30
    base = tmp_path / "base.txt"
    run(capsys, "generate", "cycle", "--n", str(n), "--out", str(base))
    dense = tmp_path / "dense.txt"
    with open(dense, "w") as fh:
        for i in range(n):
            for j in range(i + 2, n):
                if not (i == 0 and j == n - 1):
                    fh.write(f"{i} {j} 1\n")
    code, out, _ = run(capsys, "partition-abstract", "--base", str(base), "--parts", str(dense),
                       "--epsilon", "0.5", "--seed", "2")
    assert code == 0
    doc = validate("partition", out)
    assert doc["epsilon_global"] <= 0.5


def test_simulate(tmp_path, capsys):
    g = tmp_path / "k3.txt"
    run(capsys, "generate", "complete", "--n", "3", "--out", str(g))
    code, out, _ = run(capsys, "simulate", str(g), "--trials", "4", "--t-total", "20", "--t-burn", "2")
    assert code == 0
    doc = validate("simulation", out)
    assert doc["trials"] == 4
    h = tmp_path / "k3b.txt"
    run(capsys, "generate", "complete", "--n", "3", "--w", "2", "--out", str(h))
    code, out, _ = run(capsys, "simulate", str(g), "--abstract", str(h), "--trials", "2", "--t-total", "10")
    doc = validate("simulation", out)
    assert doc["output_error_exact"] == pytest.approx(1 / 18)
    code, out, _ = run(capsys, "simulate", str(g), "--order", "2", "--trials", "2", "--t-total", "20",
                       "--t-burn", "5", "--format", "csv")
    assert out.splitlines()[0].startswith("trial,")


def test_demo_l1(capsys):
    code, out, _ = run(capsys, "demo-l1")
    assert code == 0 and "coincide" in out
    code, out, _ = run(capsys, "demo-l1", "--format", "json")
    doc = validate("demo", out)
    assert doc["l1"]["cost"] == pytest.approx(18)
    assert run(capsys, "demo-l1", "--gamma", "1e-5")[0] == 1


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0

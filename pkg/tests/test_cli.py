import json
from pathlib import Path

import pytest

from pgmass.cli import main, parse_number
from pgmass.ledger import ExperimentLedger
from pgmass.pcgroup import parse_pc
from pgmass.catalog import m27
from pgmass.pgen.tree import TreeNode

GROUPS = Path(__file__).resolve().parent.parent / "groups"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_number():
    assert parse_number("10^5") == 100000
    assert parse_number("2^8") == 256
    assert parse_number("1e5") == 100000
    assert parse_number("77") == 77


def test_group_files_match_catalog():
    assert parse_pc((GROUPS / "m27.pc").read_text()) == m27()


@pytest.mark.parametrize("action,expected", [("ab", "3,3"), ("aut", "54")])
def test_group_commands(capsys, action, expected):
    code, out, _ = run(capsys, "group", action, GROUPS / "m27.pc")
    assert code == 0 and out.strip() == expected


def test_group_show_trivial(capsys):
    code, out, _ = run(capsys, "group", "show", GROUPS / "trivial.pc")
    assert code == 0 and out.startswith("order 1")
    code, out, _ = run(capsys, "group", "show", "--json", GROUPS / "trivial.pc")
    assert json.loads(out)["order"] == 1


def test_group_classes_and_maxsub(capsys):
    code, out, _ = run(capsys, "group", "classes", "--json", GROUPS / "m16.pc")
    sizes = sorted(c["size"] for c in json.loads(out)["classes"])
    assert sizes == [1, 1, 1, 1, 2, 2, 2, 2, 2, 2]
    code, out, _ = run(capsys, "group", "maxsub", "catalog:m16")
    assert sorted(out.split()) == ["2,4", "8", "8"]


def test_mass_command(capsys):
    code, out, _ = run(capsys, "mass", "--type", "3:1+3Z,1+3Z", GROUPS / "m27.pc")
    assert code == 0 and out.strip() == "A=48 Aut=54 mass=8/9"
    code, out, _ = run(capsys, "mass", "--type", "2:3mod4,3mod4", GROUPS / "sd16.pc")
    assert "mass=1" in out and "mass=1/" not in out
    code, out, _ = run(capsys, "mass", "--json", "--type", "2:5mod8,5mod8", GROUPS / "m27.pc")
    assert code == 0 and json.loads(out)["mass"] == "0"


def test_error_exit_codes(capsys, tmp_path):
    bad = tmp_path / "bad.pc"
    bad.write_text("3 2\npow 1 = 2^1\nnonsense\n")
    assert run(capsys, "group", "ab", bad)[0] == 4
    assert run(capsys, "mass", "--type", "2:1mod4", GROUPS / "m16.pc")[0] == 2
    code, _, err = run(capsys, "braid", "--p", "2", "--q", "3", "--sigma", "(1 2)")
    assert code == 2 and "cyclotomic" in err
    assert run(capsys, "group", "ab", tmp_path / "missing.pc")[0] == 2
    assert run(capsys, "tree", "--type", "2:5mod8,5mod8", "--max-order", "2^30")[0] == 2


def test_tree_command(capsys, tmp_path):
    code, out, _ = run(capsys, "tree", "--p", "2", "--type", "2:5mod8,5mod8",
                       "--max-order", "2^2")
    assert code == 0
    tree = json.loads(out)["tree"]
    assert tree["children"] == []
    dest = tmp_path / "t.json"
    code, _, err = run(capsys, "tree", "--p", "3", "--type", "3:1+3Z,1+3Z", "--max-order", "3^5",
                       "--out", dest, "--check-conservation")
    assert code == 0 and "FAIL" not in err
    data = json.loads(dest.read_text())
    root = TreeNode.from_json(data["tree"])
    assert TreeNode.from_json(root.to_json()).to_json() == data["tree"]
    top = [n for n in root.walk() if n.order_exponent == 5 and n.mult_rank == 2]
    assert [str(n.mass) for n in top] == ["2/81"]


def test_braid_command(capsys, tmp_path):
    code, out, _ = run(capsys, "braid", "--p", "3", "--q", "2", "--sigma", "(1 2)(3 4)",
                       "--samples", "0", "--seed", "1")
    assert code == 0 and json.loads(out)["buckets"] == []
    led = tmp_path / "ledger.jsonl"
    args = ["braid", "--p", "3", "--q", "2", "--sigma", "(1 2)(3 4)", "--samples", "20",
            "--seed", "42", "--ledger", led, "--csv", tmp_path / "h.csv"]
    code, out1, _ = run(capsys, *args)
    report = json.loads(out1)
    assert sum(b["count"] for b in report["buckets"]) == 20
    assert all(b["abelianization"] == [3, 3] for b in report["buckets"])
    assert (tmp_path / "h.csv").read_text().startswith("key,count")
    code, out2, _ = run(capsys, *args)
    assert out1 == out2
    entries = ExperimentLedger(led).entries()
    assert len(entries) == 2
    assert entries[0]["summary_hash"] == entries[1]["summary_hash"]
    assert entries[0]["seed"] == 42


def test_census_command(capsys, tmp_path):
    led = tmp_path / "ledger.jsonl"
    csv_path = tmp_path / "koch.csv"
    code, out, _ = run(capsys, "census", "--classifier", "koch", "--bound", "10^4", "--count",
                       "300", "--seed", "7", "--ledger", led, "--csv", csv_path)
    assert code == 0
    rep = json.loads(out)
    assert rep["total"] == 300 and rep["window"] == [1000, 10000]
    header = csv_path.read_text().splitlines()[0]
    assert header == "q,r,type,classifier,outcome,n"
    run(capsys, "census", "--classifier", "koch", "--bound", "10^4", "--count", "300",
        "--seed", "7", "--ledger", led)
    e = ExperimentLedger(led).entries()
    assert e[0]["summary_hash"] == e[1]["summary_hash"]


def test_ray_census_command(capsys, tmp_path):
    resume = tmp_path / "ray.jsonl"
    code, out, _ = run(capsys, "census", "--classifier", "ray5319", "--bound", "5000",
                       "--resume", resume)
    first = json.loads(out)
    assert code == 0 and first["shape_Z2xZ2^n_n>=4"]
    code, out, _ = run(capsys, "census", "--classifier", "ray5319", "--bound", "5000",
                       "--resume", resume)
    assert json.loads(out) == first

import json

import pytest

from fcrystal.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_spec(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_analyze_k3_family(tmp_path, capsys):
    spec = write_spec(tmp_path, "k3.json", {
        "p": 5, "m": 1, "rank": 3,
        "family": {"kind": "k3-isoclinic", "params": {"r": 3}},
    })
    code, out, _ = run(capsys, "analyze", spec)
    assert code == 0
    data = json.loads(out)
    assert data["n"] == {"status": "equal", "value": 2}
    assert data["level_torsion"]["certificate"] == {"kind": "period",
                                                    "param": 3}
    assert data["slopes"]["newton"] == ["1", "1", "1"]
    assert data["bounds"]["theorem12"] == 2


def test_analyze_identity_matrix(tmp_path, capsys):
    spec = write_spec(tmp_path, "id.json", {
        "p": 3, "m": 1, "rank": 2,
        "matrix": [[1, 0], [0, 1]],
    })
    code, out, _ = run(capsys, "analyze", spec)
    assert code == 0
    data = json.loads(out)
    assert data["n"]["value"] == 0
    assert data["slopes"]["ordinary"] is True


def test_analyze_rank2_matrix(tmp_path, capsys):
    spec = write_spec(tmp_path, "r2.json", {
        "p": 5, "m": 1, "rank": 2,
        "matrix": [["5", 1], [0, "25"]],   # decimal strings accepted
    })
    code, out, _ = run(capsys, "analyze", spec)
    assert code == 0
    data = json.loads(out)
    assert sorted(data["slopes"]["newton"]) == ["1", "2"]
    assert data["n"] == {"status": "upper-bound-only", "value": 2}


def test_analyze_json_byte_stable(tmp_path, capsys, monkeypatch):
    spec = write_spec(tmp_path, "k3.json", {
        "p": 2, "m": 1, "rank": 4,
        "family": {"kind": "k3-isoclinic", "params": {"r": 4}},
    })
    _, first, _ = run(capsys, "analyze", spec)
    monkeypatch.setenv("FCRYSTAL_THREADS", "8")
    _, second, _ = run(capsys, "analyze", spec)
    assert first == second


def test_analyze_table_format(tmp_path, capsys):
    spec = write_spec(tmp_path, "c.json", {
        "p": 5, "m": 1, "rank": 2,
        "family": {"kind": "cyclic", "params": {"e": [0, 3]}},
    })
    code, out, _ = run(capsys, "analyze", spec, "--format", "table")
    assert code == 0
    assert "level torsion: 3" in out
    assert "alpha" in out and "delta" in out  # trace table rendered


def test_analyze_parse_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "analyze", str(bad))[0] == 1
    both = write_spec(tmp_path, "both.json", {
        "p": 5, "m": 1, "rank": 1, "matrix": [[1]],
        "family": {"kind": "cyclic", "params": {"e": [0]}},
    })
    assert run(capsys, "analyze", both)[0] == 1
    missing = write_spec(tmp_path, "missing.json", {"p": 5, "rank": 1})
    assert run(capsys, "analyze", missing)[0] == 1


def test_analyze_low_precision_rejected(tmp_path, capsys):
    spec = write_spec(tmp_path, "k3.json", {
        "p": 5, "m": 1, "rank": 3,
        "family": {"kind": "k3-isoclinic", "params": {"r": 3}},
    })
    code, _, err = run(capsys, "analyze", spec, "--precision", "4")
    assert code == 2
    assert "precision" in err


def test_bound_examples(capsys):
    code, out, _ = run(capsys, "bound", "--hodge", "0,1,5", "--lambda", "2")
    assert code == 0 and "theorem12: 7" in out
    code, out, _ = run(capsys, "bound", "--c", "3", "--d", "3")
    assert code == 0 and "pdiv: 3" in out
    code, out, _ = run(capsys, "bound", "--hodge", "0,0,3,3",
                       "--lambda", "3/2")
    assert code == 0 and "theorem12: 6" in out


def test_bound_bad_flags(capsys):
    assert run(capsys, "bound")[0] == 1
    assert run(capsys, "bound", "--hodge", "0,x")[0] == 1
    assert run(capsys, "bound", "--hodge", "0,2", "--lambda", "5")[0] == 1
    assert run(capsys, "bound", "--c", "3")[0] == 1


def test_make_family_roundtrip(tmp_path, capsys):
    out_path = str(tmp_path / "cyc.json")
    code, _, _ = run(capsys, "make-family", "cyclic", "--p", "5",
                     "--e", "0,3", "-o", out_path)
    assert code == 0
    code, out, _ = run(capsys, "analyze", out_path)
    assert code == 0
    assert json.loads(out)["n"]["value"] == 3


def test_make_family_k3_nonisoclinic_summands(tmp_path, capsys):
    code, out, _ = run(capsys, "make-family", "k3-nonisoclinic", "--p", "3",
                       "--r1", "1", "--mid", "1", "--r2", "1")
    assert code == 0
    spec = json.loads(out)
    assert spec["rank"] == 5 and spec["summands"] == [2, 1, 2]


def test_make_family_bad_parameters(capsys):
    code, _, err = run(capsys, "make-family", "rank2", "--p", "5",
                       "--l1", "0", "--l2", "2")
    assert code == 1 and "split" in err


def test_verify_subset(capsys):
    code, out, _ = run(capsys, "verify", "--subset", "rank2")
    assert code == 0
    assert "checks passed" in out and "FAIL" not in out


def test_verify_paper_alias(capsys):
    code, out, _ = run(capsys, "verify-paper", "--subset", "k3")
    assert code == 0 and "checks passed" in out


def test_smith(tmp_path, capsys):
    code, out, _ = run(capsys, "smith", "--matrix",
                       "[[1,0,0],[0,5,0],[0,0,125]]", "--p", "5")
    assert code == 0 and out.strip() == "0,1,3"
    spec = write_spec(tmp_path, "k3.json", {
        "p": 5, "m": 1, "rank": 3,
        "family": {"kind": "k3-isoclinic", "params": {"r": 3}},
    })
    code, out, _ = run(capsys, "smith", spec)
    assert code == 0 and out.strip() == "0,1,2"


def test_smith_singular_exit_code(capsys):
    code, _, _ = run(capsys, "smith", "--matrix", "[[0,0],[0,0]]",
                     "--p", "5")
    assert code == 2

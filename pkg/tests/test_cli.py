import json

import pytest

from diffpi.cli import main, parse_range, UsageError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_range_parsing():
    assert parse_range("3") == [3]
    assert parse_range("2..4") == [2, 3, 4]
    for bad in ["0", "4..2", "a..b"]:
        with pytest.raises(UsageError):
            parse_range(bad)


def test_codim_csv(capsys):
    code, out, _ = run(capsys, "codim", "--model", "ut2_eps", "--n", "1..5", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "model,n,c_n,expected,match,mode,seed,ms"
    assert [int(line.split(",")[2]) for line in lines[1:]] == [2, 5, 13, 33, 81]
    assert all(line.endswith(",") for line in lines[1:])


def test_codim_json(capsys):
    code, out, _ = run(capsys, "codim", "--model", "m1", "--n", "1..6", "--format", "json")
    assert code == 0
    assert [r["c_n"] for r in json.loads(out)] == [1, 2, 3, 4, 5, 6]


def test_codim_ut2_table(capsys):
    code, out, _ = run(capsys, "codim", "--model", "ut2", "--n", "1..6", "--format", "json")
    assert [r["c_n"] for r in json.loads(out)] == [1, 2, 6, 18, 50, 130]


def test_output_is_reproducible(capsys, tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for path in (a, b):
        assert main(["codim", "--model", "ut2_D", "--n", "1..3", "--mode", "sampled", "--seed", "5",
                     "--format", "csv", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_timing_column(capsys):
    code, out, _ = run(capsys, "codim", "--model", "m2", "--n", "2", "--format", "csv", "--timing")
    assert code == 0
    assert out.splitlines()[1].split(",")[-1] != ""


def test_cochar_examples(capsys):
    code, out, _ = run(capsys, "cochar", "--model", "ut2_delta", "--n", "3")
    assert code == 0
    assert "(3):4, (2,1):4, (1^3):1" in out
    code, out, _ = run(capsys, "cochar", "--model", "c_eps", "--n", "5")
    assert "(5):2, (4,1):1" in out
    code, out, _ = run(capsys, "cochar", "--model", "grassmann_der", "--t", "1", "--n", "4", "--format", "json")
    rows = [r for r in json.loads(out) if r["m"]]
    assert [r["partition"] for r in rows] == ["(4)", "(3,1)", "(2,1^2)", "(1^4)"]
    assert all(r["m"] == 2 for r in rows)


def test_verify_examples(capsys):
    code, out, _ = run(capsys, "verify", "--model", "ut2_delta", "--n", "1..4", "--format", "json")
    assert code == 0
    assert all(r["equal"] for r in json.loads(out))
    code, out, _ = run(capsys, "verify", "--model", "m1_D", "--n", "1..5", "--format", "json")
    rows = json.loads(out)
    assert code == 0 and [r["lower"] for r in rows] == [3, 4, 5, 6, 7]
    code, out, _ = run(capsys, "verify", "--model", "ut2", "--gens", "[x1,x2][x3,x4]", "--n", "1..5", "--format", "json")
    assert code == 0 and all(r["equal"] for r in json.loads(out))


def test_verify_failure_json(capsys):
    code, _, err = run(capsys, "verify", "--model", "ut2", "--gens", "[x1,x2][x3,x4][x5,x6]", "--n", "4")
    assert code == 1
    report = json.loads(err)
    assert report["status"] == "fail" and report["failures"][0]["upper"] > 18


def test_verify_refutation(capsys):
    code, _, err = run(capsys, "verify", "--model", "ut2_eps", "--gens", "[x,y]", "--n", "2")
    assert code == 1
    report = json.loads(err)
    assert report["failures"][0]["error"] == "refuted"


def test_plan_error_exit_code(capsys, monkeypatch):
    monkeypatch.setenv("DIFFPI_CAP", "10")
    code, _, err = run(capsys, "codim", "--model", "ut2", "--n", "4")
    assert code == 3
    assert json.loads(err)["error"] == "PlanError"


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["codim", "--model", "ut2", "--json", "x.json", "--n", "2"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["codim", "--model", "ut2", "--mode", "canonical", "--n", "2"])
    with pytest.raises(SystemExit):
        main(["codim", "--model", "ut2", "--t", "2", "--n", "2"])


def test_derspace(capsys):
    code, out, _ = run(capsys, "derspace", "--model", "ut2", "--format", "json")
    result = json.loads(out)
    assert code == 0
    assert result["dim"] == 2 and result["derived_dim"] == 1 and result["derived_abelian"]
    assert result["all_inner"]


def test_grassmann_scan(capsys):
    code, out, _ = run(capsys, "grassmann-scan", "--t", "1", "--n", "3", "--format", "json")
    (row,) = json.loads(out)
    assert code == 0 and row["stable"] == 8 and row["match"]


def test_zoo_list_and_export_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "zoo", "list", "--format", "json")
    assert code == 0 and len(json.loads(out)) == 15
    path = tmp_path / "mine.json"
    assert main(["zoo", "export", "--model", "ut2_eps", "--out", str(path)]) == 0
    code, out, _ = run(capsys, "codim", "--json", str(path), "--n", "1..3", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert [r["c_n"] for r in rows] == [2, 5, 13]
    assert rows[0]["model"] == "mine" and rows[0]["expected"] is None
    code, out, _ = run(capsys, "verify", "--json", str(path), "--n", "3", "--format", "json",
                       "--gens", "[x,y]^eps - [x,y]; x^eps y^eps; x^{eps eps} - x^eps")
    assert code == 0 and json.loads(out)[0]["equal"]

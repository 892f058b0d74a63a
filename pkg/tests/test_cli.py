import json

import jsonschema
import pytest

from kbwalk.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def validate(obj, schema, name):
    jsonschema.Draft202012Validator(schema(name)).validate(obj)


def test_sequence_tribonacci(capsys, schema):
    code, out = run_json(capsys, "sequence", "--k", "3", "--init", "1,3,6", "--n", "7")
    assert code == 0
    assert out["terms"] == ["0", "1", "3", "6", "10", "19", "35", "64"]
    validate(out, schema, "sequence.schema.json")


def test_sequence_powers(capsys):
    code, out = run_json(capsys, "sequence", "--k", "2", "--powers", "--n", "5")
    assert code == 0
    assert [int(t) for t in out["terms"]] == [0, 1, 2, 3, 5, 8]


def test_sequence_growth(capsys, schema):
    code, out = run_json(capsys, "sequence", "--k", "4", "--n", "60", "--check-growth")
    assert code == 0 and out["growth"]["ok"]
    validate(out, schema, "sequence.schema.json")


def test_sequence_big_terms_are_strings(capsys):
    _, out = run_json(capsys, "sequence", "--n", "200")
    assert out["terms"][-1] == str(int(out["terms"][-2]) + int(out["terms"][-3]))
    assert int(out["terms"][-1]) > 2**64


def test_admissibility_error(capsys, schema):
    code, out = run_json(capsys, "sequence", "--k", "2", "--init", "1,1", "--n", "5")
    assert code == 2
    assert out["error"] == "admissibility"
    assert out["n"] == 2 and out["signs"] == "+-"
    validate(out, schema, "error.schema.json")


@pytest.mark.parametrize("argv", [
    ["sequence", "--k", "1", "--init", "1"],
    ["sequence", "--k", "3", "--init", "1,2"],
    ["walk", "--signs", "++x"],
    ["walk", "--seed", "3"],
    ["walk", "--signs", "++-", "--target", "nowhere"],
    ["probs", "--k", "2", "--target", "f1"],
    ["montecarlo", "--k", "2", "--trials", "10"],
])
def test_usage_errors_exit_2(capsys, schema, argv):
    code, out = run_json(capsys, *argv)
    assert code == 2
    validate(out, schema, "error.schema.json")


def test_sequence_csv_and_table(capsys):
    code, out = run(capsys, "sequence", "--n", "3", "--format", "csv")
    assert code == 0
    assert out == "n,f_n\r\n0,0\r\n1,1\r\n2,2\r\n3,3\r\n"
    _, table = run(capsys, "sequence", "--n", "3", "--format", "table")
    assert table.splitlines()[0].split() == ["n", "f_n"]
    assert table.splitlines()[-1].split() == ["3", "3"]


def test_walk_signs(capsys, schema):
    code, out = run_json(capsys, "walk", "--k", "2", "--signs", "++-++-+")
    assert code == 0
    assert out["sums"] == ["1", "3", "0", "5", "13", "0", "21"]
    assert out["predicted"] == out["actual"] == [3, 6]
    assert out["agree"] is True
    validate(out, schema, "walk.schema.json")


def test_walk_tribonacci_targets(capsys, schema):
    _, plus = run_json(capsys, "walk", "--tribonacci", "--signs", "++++-+++-", "--target", "f1")
    assert plus["actual"] == plus["predicted"] == [1, 5, 9]
    _, minus = run_json(capsys, "walk", "--tribonacci", "--signs=----+---+", "--target", "neg_f1")
    assert minus["actual"] == minus["predicted"] == [1, 5, 9]
    validate(minus, schema, "walk.schema.json")


def test_walk_custom_target_has_no_prediction(capsys, schema):
    code, out = run_json(capsys, "walk", "--signs", "+++", "--target", "6")
    assert code == 0
    assert out["predicted"] is None and out["agree"] is None and out["actual"] == [3]
    validate(out, schema, "walk.schema.json")


def test_walk_seeded_is_deterministic(capsys):
    _, a = run(capsys, "walk", "--k", "3", "--seed", "7", "--horizon", "40")
    _, b = run(capsys, "walk", "--k", "3", "--seed", "7", "--horizon", "40")
    assert a == b
    assert json.loads(a)["agree"] is True


def test_walk_csv(capsys):
    _, out = run(capsys, "walk", "--signs", "+-", "--format", "csv")
    assert out == "n,w_n,F_n\r\n1,1,1\r\n2,-1,-1\r\n"


def test_probs_fibonacci(capsys, schema):
    code, out = run_json(capsys, "probs", "--k", "2", "--target", "zero", "--imax", "1")
    assert code == 0 and out["agree"]
    assert [(r["num"], r["exp"]) for r in out["exact"]] == [("3", 2), ("3", 4)]
    assert out["per_i_agree"] == [True, True]
    validate(out, schema, "probs.schema.json")


def test_probs_k3(capsys, schema):
    code, out = run_json(capsys, "probs", "--k", "3", "--target", "zero", "--imax", "1")
    assert code == 0
    assert [(r["num"], r["exp"]) for r in out["exact"]] == [("7", 3), ("7", 6)]
    validate(out, schema, "probs.schema.json")


def test_probs_as_stated(capsys, schema):
    code, out = run_json(capsys, "probs", "--k", "2", "--imax", "2", "--as-stated")
    assert code == 0
    assert [r["matches_bruteforce"] for r in out["as_stated"]] == [False, False, False]
    assert "note" in out
    validate(out, schema, "probs.schema.json")


def test_probs_tribonacci_f1(capsys, schema):
    code, out = run_json(capsys, "probs", "--tribonacci", "--target", "f1", "--imax", "1")
    assert code == 0 and out["agree"]
    assert [(e["num"], e["exp"]) for e in out["events"]] == [("7", 4), ("7", 7)]
    assert [(r["num"], r["exp"]) for r in out["exact"]][:2] == [("1", 1), ("7", 4)]
    assert "note" in out
    validate(out, schema, "probs.schema.json")


def test_probs_custom_target(capsys, schema):
    code, out = run_json(capsys, "probs", "--k", "2", "--target", "3", "--horizon", "6")
    assert code == 0 and out["exact"] == []
    validate(out, schema, "probs.schema.json")


def test_probs_cap(capsys, monkeypatch, schema):
    monkeypatch.setenv("KBWALK_ENUM_CAP", "8")
    code, out = run_json(capsys, "probs", "--k", "2", "--imax", "3")
    assert code == 2 and out["error"] == "enumeration_cap"
    validate(out, schema, "error.schema.json")


def test_probs_csv(capsys):
    _, out = run(capsys, "probs", "--k", "2", "--imax", "0", "--format", "csv")
    lines = out.split("\r\n")
    assert lines[0] == "i,num,exp" and lines[1] == "0,3,2"


def test_dimension(capsys, schema):
    code, out = run_json(capsys, "dimension", "--k", "2", "--mmax", "120")
    assert code == 0
    assert abs(out["fitted_slope"] - 1 / 3) < 0.02
    assert abs(out["moran"] - 1 / 3) < 1e-12
    validate(out, schema, "profile.schema.json")


def test_dimension_tribonacci(capsys, schema):
    code, out = run_json(capsys, "dimension", "--tribonacci-f1", "--mmax", "121")
    assert code == 0 and abs(out["fitted_slope"] - 0.25) < 0.02
    validate(out, schema, "profile.schema.json")


def test_dimension_ratios(capsys, schema):
    code, out = run_json(capsys, "dimension", "--ratios", "0.5,0.5")
    assert code == 0 and out["moran"] == pytest.approx(1.0, abs=1e-12)
    validate(out, schema, "moran.schema.json")
    code, out = run_json(capsys, "dimension", "--ratios", "1.5,0.5")
    assert code == 2


def test_dimension_csv(capsys):
    _, out = run(capsys, "dimension", "--k", "3", "--mmax", "8", "--format", "csv")
    assert out.splitlines()[0] == "m,N_m,delta,log2N"


def test_montecarlo_gate_and_rerun(capsys, schema):
    argv = ["montecarlo", "--k", "2", "--seed", "20261015", "--trials", "1000000"]
    code, first = run(capsys, *argv)
    assert code == 0
    _, second = run(capsys, *argv, "--workers", "3")
    assert first == second
    out = json.loads(first)
    assert all(abs(r["z"]) < 4 for r in out["comparisons"] if r["gated"])
    assert all(r["gated"] for r in out["comparisons"][:3])
    validate(out, schema, "montecarlo.schema.json")


def test_montecarlo_small_trials_do_not_fail(capsys, schema):
    code, out = run_json(capsys, "montecarlo", "--k", "2", "--seed", "1", "--trials", "10")
    assert code == 0 and out["agree"]
    validate(out, schema, "montecarlo.schema.json")


def test_montecarlo_tribonacci_f1(capsys, schema):
    code, out = run_json(capsys, "montecarlo", "--tribonacci", "--target", "f1",
                         "--seed", "5", "--trials", "200000", "--horizon", "13")
    assert code == 0
    assert [r["event"] for r in out["comparisons"]] == ["exactly_0", "exactly_1", "exactly_2"]
    validate(out, schema, "montecarlo.schema.json")


def test_montecarlo_table(capsys):
    code, out = run(capsys, "montecarlo", "--seed", "2", "--trials", "1000", "--format", "table")
    assert code == 0
    assert out.splitlines()[0].split() == ["event", "empirical", "exact", "z"]


def test_config_precedence(capsys, tmp_path, schema):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"k": 3, "n": 6, "init": "1,3,6"}))
    validate(json.loads(cfg.read_text()), schema, "config.schema.json")
    _, out = run_json(capsys, "sequence", "--config", str(cfg))
    assert out["spec"] == {"k": 3, "init": [1, 3, 6]} and len(out["terms"]) == 7
    _, out = run_json(capsys, "sequence", "--config", str(cfg), "--n", "2")
    assert len(out["terms"]) == 3
    _, out = run_json(capsys, "sequence", "--config", str(cfg), "--powers")
    assert out["spec"]["init"] == [1, 2, 4]


def test_config_seed(capsys, tmp_path):
    cfg = tmp_path / "mc.json"
    cfg.write_text(json.dumps({"seed": 11, "trials": 500}))
    code, out = run_json(capsys, "montecarlo", "--config", str(cfg))
    assert code == 0 and out["seed"] == 11 and out["trials"] == 500


def test_missing_config_file(capsys, tmp_path):
    code, out = run_json(capsys, "sequence", "--config", str(tmp_path / "absent.json"))
    assert code == 2 and "error" in out


def test_verify_json(capsys, schema):
    code, out = run_json(capsys, "verify")
    assert code == 0 and out["ok"]
    assert len(out["checks"]) == 9
    validate(out, schema, "verify.schema.json")

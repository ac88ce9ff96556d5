import json

import pytest

from chernforms.cli import ConfigError, SuiteConfig, main, run_realize, run_suite


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def records(text):
    return [json.loads(line) for line in text.splitlines()]


def total(text):
    return records(text)[-1]


def test_lemma_main_example(capsys):
    code, out, _ = run(capsys, "verify", "lemma-main", "--n", "2", "--rank", "3",
                       "--order", "4", "--cases", "10", "--seed", "7")
    assert code == 0
    recs = records(out)
    cases = [r for r in recs if "check" in r]
    assert len(cases) == 10 and all(r["verdict"] == "pass" for r in cases)
    summ = [r for r in recs if r.get("summary") == "lemma-main"][0]
    assert (summ["cases"], summ["passed"], summ["failed"]) == (10, 10, 0)


def test_lemma_algebra_example(capsys):
    code, out, _ = run(capsys, "verify", "lemma-algebra", "--k", "3", "--cases", "25")
    assert code == 0
    t = total(out)
    assert t["cases"] == 25 and t["passed"] == 25 and t["status"] == "pass"


@pytest.mark.slow
def test_verify_all_one_case(capsys):
    code, out, _ = run(capsys, "verify", "all", "--cases", "1", "--seed", "1")
    assert code == 0
    names = {r["summary"] for r in records(out) if "summary" in r}
    assert {"lemma-algebra", "lemma-main", "corollary-id", "newton", "decompose",
            "realize-composite", "realize-vandermonde", "realize-smooth", "cs-closed",
            "quadrature-pl", "quadrature-cs", "quadrature-bc", "total"} <= names


def test_rerun_is_byte_identical(capsys):
    argv = ("verify", "newton", "--cases", "5", "--seed", "3")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_seed_changes_cases(capsys):
    _, a, _ = run(capsys, "verify", "decompose", "--cases", "3", "--seed", "1")
    _, b, _ = run(capsys, "verify", "decompose", "--cases", "3", "--seed", "2")
    assert a != b


def test_timing_is_opt_in(capsys):
    _, plain, _ = run(capsys, "verify", "lemma-algebra", "--cases", "2")
    _, timed, _ = run(capsys, "verify", "lemma-algebra", "--cases", "2", "--timing")
    assert "wall_clock_s" not in plain and "wall_clock_s" in timed


def test_out_file(tmp_path, capsys):
    path = tmp_path / "rep.jsonl"
    code, out, _ = run(capsys, "verify", "newton", "--cases", "2", "--out", str(path))
    assert code == 0 and out == ""
    assert total(path.read_text())["status"] == "pass"


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"cases": 3, "seed": 5}))
    code, out, _ = run(capsys, "verify", "newton", "--config", str(cfg), "--cases", "2")
    assert code == 0 and total(out)["cases"] == 2


@pytest.mark.parametrize("argv,field", [
    (("verify", "lemma-main", "--order", "3"), "order"),
    (("verify", "newton", "--cases", "0"), "cases"),
    (("quadrature", "pl", "--tol", "-1"), "tol"),
])
def test_invalid_config_exit_2(capsys, argv, field):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    assert field in err


def test_unknown_config_field(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"casez": 3}))
    code, _, err = run(capsys, "verify", "newton", "--config", str(cfg))
    assert code == 2 and "casez: unknown field" in err


def test_bad_suite_name(capsys):
    assert run(capsys, "verify", "nonsense")[0] == 2


def test_failing_check_exit_1(capsys):
    # an absurdly tight tolerance cannot be met by the quadrature
    code, out, _ = run(capsys, "quadrature", "pl", "--tol", "1e-30")
    assert code == 1 and total(out)["status"] == "fail"


def test_quadrature_subcommand(capsys):
    code, out, _ = run(capsys, "quadrature", "cs")
    assert code == 0
    recs = [r for r in records(out) if "check" in r]
    assert recs and all(r["verdict"] == "pass" for r in recs)
    assert all(r["converges"] and len(r["convergence"]) >= 2 for r in recs)


def test_suite_config_validation():
    with pytest.raises(ConfigError) as e:
        SuiteConfig(suite="bogus").validate()
    assert any("suite" in p for p in e.value.problems)
    rep = run_suite(SuiteConfig(suite="calculus", cases=3))
    assert rep.passed


# --- realize --------------------------------------------------------------------

COMPOSITE = {"kind": "composite", "chart": {"kind": "complex", "dim": 2}, "order": 4, "k": 2,
             "sigma": {"z1*zb1": "1", "z2*zb2": "1/2"}, "f": [{"z1": "1", "z1*z2": "2"}]}
VANDERMONDE = {"kind": "vandermonde", "chart": {"kind": "complex", "dim": 3}, "order": 4,
               "sigma": {"z1*zb1": "1", "z1*zb2": "1+i", "z2*zb1": "1-i"}}
SMOOTH = {"kind": "smooth", "chart": {"kind": "real", "dim": 4},
          "terms": [[{"x1": "1"}, {"x2^2": "1", "x3": "-2"}]]}


def write(tmp_path, obj, name="spec.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def test_realize_composite(tmp_path, capsys):
    code, out, _ = run(capsys, "realize", write(tmp_path, COMPOSITE))
    assert code == 0
    doc = json.loads(out)
    assert doc["report"]["verdict"] == "pass"
    assert doc["artifact"]["kind"] == "composite"
    assert len(doc["artifact"]["bundle"]["summands"]) == 1


def test_realize_vandermonde(tmp_path, capsys):
    code, out, _ = run(capsys, "realize", write(tmp_path, VANDERMONDE))
    assert code == 0
    art = json.loads(out)["artifact"]
    assert all(isinstance(m, int) for m in art["multiplicities"])
    assert json.loads(out)["report"]["verdict"] == "pass"


def test_realize_smooth(tmp_path, capsys):
    code, out, _ = run(capsys, "realize", write(tmp_path, SMOOTH))
    assert code == 0 and json.loads(out)["artifact"]["connections"]


def test_realize_deterministic(tmp_path, capsys):
    path = write(tmp_path, COMPOSITE)
    assert run(capsys, "realize", path)[1] == run(capsys, "realize", path)[1]


def test_realize_malformed_json(tmp_path, capsys):
    code, out, err = run(capsys, "realize", write(tmp_path, '{"kind": "composite",\n  oops}'))
    assert code == 2 and out == ""
    assert "line 2" in err


@pytest.mark.parametrize("patch,field", [
    ({"kind": "torus"}, "kind"),
    ({"k": 5}, "k"),
    ({"f": []}, "f"),
    ({"sigma": {"z1*zb1": "1", "z1": "1"}}, "sigma"),
    ({"sigma": {"w7": "1"}}, "sigma"),
    ({"chart": {"kind": "real", "dim": 2}}, "chart"),
    ({"chart": None}, "chart"),
])
def test_realize_bad_fields(tmp_path, capsys, patch, field):
    spec = {**COMPOSITE, **patch}
    code, out, err = run(capsys, "realize", write(tmp_path, spec))
    assert code == 2 and out == ""
    assert err.startswith(f"config error: {field}")


def test_run_realize_returns_record():
    art, rec = run_realize(VANDERMONDE)
    assert rec["verdict"] == "pass" and art["kind"] == "vandermonde"
    with pytest.raises(ConfigError):
        run_realize([1, 2])

import json

import pytest

from prfkit.harness import cli, suites
from prfkit.harness.checks import BUDGET, FAIL, PASS, PRECONDITION, CheckSpec, run_check
from prfkit.terms import Atom, PureIter, Succ


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_pass_and_fail():
    ok = run_check(CheckSpec("t/ok", PureIter(Succ()), "I", ((0, 50),)))
    assert ok.status == PASS and ok.tested_points == 51
    bad = run_check(CheckSpec("t/bad", Succ(), "I", ((0, 5),)))
    assert bad.status == FAIL
    assert bad.first_mismatch == {"args": [0], "got": 1, "want": 0}


def test_check_budget_and_precondition():
    r = run_check(CheckSpec("t/b", PureIter(Succ()), "I", ((0, 500),), budget=10, memo_capacity=0))
    assert r.status == BUDGET
    r = run_check(CheckSpec("t/p", Succ(), "S", ((0, 5),), precondition=lambda a: a[0] < 3))
    assert r.status == PRECONDITION and r.first_mismatch["args"] == [3]


def test_monotone_expectation():
    r = run_check(CheckSpec("t/m", Atom("O"), None, ((0, 5),), expect="monotone"))
    assert r.status == FAIL
    r = run_check(CheckSpec("t/m2", Atom("Sq"), None, ((0, 50),), expect="monotone"))
    assert r.status == PASS


def test_report_keys():
    r = run_check(CheckSpec("t/k", Succ(), "S", ((0, 1),)))
    assert set(r.to_dict()) == {"id", "status", "tested_points", "first_mismatch", "steps_total", "ambiguous_minus_hits"}


def test_spec_validation():
    with pytest.raises(ValueError):
        CheckSpec("t/x", Succ(), "S", ((3, 1),))
    with pytest.raises(ValueError):
        CheckSpec("t/x", Succ(), "S", budget=0)


def test_unknown_suite():
    with pytest.raises(suites.UnknownSuite):
        suites.suite_specs("nope")


def test_suite_ids_unique_and_sorted():
    for name in suites.SUITES:
        ids = [s.id for s in suites.suite_specs(name)]
        assert ids == sorted(set(ids))


def test_oracle_self_suite_passes():
    reports = list(cli.run_suite("oracle-self"))
    assert reports and all(r.ok for r in reports)


def test_low_budget_never_fails():
    reports = list(cli.run_suite("sec5-monus", budget=10))
    statuses = {r.status for r in reports}
    assert BUDGET in statuses
    assert FAIL not in statuses


def test_cli_eval(capsys):
    code, out, _ = run_cli(capsys, "eval", "M[pr[2,1]]", "5")
    assert code == 0 and out.strip() == "4"


def test_cli_eval_section(capsys):
    code, out, _ = run_cli(capsys, "eval", "--section", "sec4", "Sq Pw", "3")
    assert code == 0 and out.strip() == "64"


def test_cli_parse(capsys):
    code, out, _ = run_cli(capsys, "parse", "S + S S")
    assert code == 0 and out.strip() == "S + S S"


def test_cli_usage_errors(capsys):
    assert run_cli(capsys, "parse", "S +")[0] == 2
    assert run_cli(capsys, "check", "--suite", "nope")[0] == 2
    assert run_cli(capsys, "catalog", "show", "sec9/X")[0] == 2
    assert run_cli(capsys, "eval", "S", "1", "--budget", "0")[0] == 2


def test_cli_budget_exit(capsys):
    code, _, err = run_cli(capsys, "eval", "S^#", "1000", "--budget", "10")
    assert code == 1 and "budget" in err


def test_cli_env_budget(capsys, monkeypatch):
    monkeypatch.setenv("PRF_BUDGET", "10")
    code, _, _ = run_cli(capsys, "eval", "S^#", "1000")
    assert code == 1
    monkeypatch.setenv("PRF_BUDGET", "junk")
    assert run_cli(capsys, "eval", "S", "1")[0] == 2


def test_cli_check_json(capsys):
    code, out, _ = run_cli(capsys, "check", "--suite", "sec2", "--format", "json")
    rows = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and rows
    assert all(set(r) == {"id", "status", "tested_points", "first_mismatch", "steps_total", "ambiguous_minus_hits"} for r in rows)


def test_cli_check_fail_exit(capsys, monkeypatch):
    monkeypatch.setenv("PRF_BUDGET", "5")
    code, out, _ = run_cli(capsys, "check", "--suite", "sec2")
    assert code == 1 and "budget-exceeded" in out.lower()


def test_cli_check_tsv(capsys):
    code, out, _ = run_cli(capsys, "check", "--suite", "oracle-self", "--format", "tsv", "--max-x", "20")
    lines = out.splitlines()
    assert code == 0 and lines[0].split("\t")[0] == "id"


def test_jobs_deterministic(capsys):
    _, one, _ = run_cli(capsys, "check", "--suite", "sec2", "--format", "tsv")
    _, many, _ = run_cli(capsys, "check", "--suite", "sec2", "--format", "tsv", "--jobs", "3")
    assert one == many


def test_cli_catalog(capsys):
    code, out, _ = run_cli(capsys, "catalog", "list", "--section", "sec2")
    assert code == 0 and "sec2/Pw" in out
    code, out, _ = run_cli(capsys, "catalog", "show", "sec2/V")
    assert code == 0 and "Hf P Rt S D D D" in out


def test_cli_export(capsys):
    code, out, _ = run_cli(capsys, "export-lets", "sec2")
    assert code == 0 and out.startswith("#")

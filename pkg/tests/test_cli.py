import json

import pytest

from connsum.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, EXIT_PARSE, SPACE_ENV, main
from connsum.space import qme_space


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_text(capsys):
    code, out, _ = run(capsys, "eval", "delta(phi^a * phi^b)")
    assert code == EXIT_OK and out.strip() == "-2"


def test_eval_json_uses_fraction_strings(capsys):
    code, out, _ = run(capsys, "eval", "1/2*orb(QC{1,2,3}^g=0 @ T{1:phi^a, 2:phi^a, 3:phi^a})", "--json")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert doc["schema"] == "eval-result/1" and doc["cutoff"] == "8/1"
    assert doc["series"]["components"][0]["terms"][0]["coeff"] == "1/2"


def test_parse_error_exit_and_position(capsys):
    code, out, _ = run(capsys, "eval", "delta(phi^a *", "--json")
    doc = json.loads(out)
    assert code == EXIT_PARSE
    assert (doc["line"], doc["column"]) == (1, 14)


def test_eval_error_exit(capsys):
    code, _, err = run(capsys, "eval", "phi^zz")
    assert code == EXIT_INPUT and "column 1" in err


def test_assert_zero(capsys):
    assert run(capsys, "eval", "phi^b*phi^b", "--assert-zero")[0] == EXIT_OK
    assert run(capsys, "eval", "phi^a", "--assert-zero")[0] == EXIT_FAIL


def test_space_from_environment(capsys, tmp_path, monkeypatch, dspace):
    path = tmp_path / "space.json"
    path.write_text(dspace.dumps())
    monkeypatch.setenv(SPACE_ENV, str(path))
    label = dspace.labels[0]
    code, out, _ = run(capsys, "eval", f"phi^{label}")
    assert code == EXIT_OK and out.strip() == f"phi^{label}"


def test_missing_space_file(capsys):
    assert run(capsys, "eval", "1", "--space", "/nonexistent.json")[0] == EXIT_INPUT


def test_fuzz_json_is_deterministic(capsys):
    a = run(capsys, "fuzz", "--operad", "qo", "--axioms", "cs", "--seed", "5", "--cases", "20", "--json")
    b = run(capsys, "fuzz", "--operad", "qo", "--axioms", "cs", "--seed", "5", "--cases", "20", "--json")
    assert a[0] == EXIT_OK and a[1] == b[1]
    assert json.loads(a[1])["schema"] == "fuzz-report/1"


def test_fuzz_endo_uses_a_seeded_space(capsys):
    code, out, _ = run(capsys, "fuzz", "--operad", "endo", "--axioms", "mo", "--seed", "2", "--cases", "10",
                       "--json")
    assert code == EXIT_OK and "space" in json.loads(out)


def test_qme_zero_action(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("0\n")
    code, out, _ = run(capsys, "qme-check", "--action", str(path), "--cutoff", "8", "--json")
    assert code == EXIT_OK and json.loads(out)["solution"]


def test_qme_round_trips_a_series_file(capsys, tmp_path):
    code, out, _ = run(capsys, "eval", "orb(QC{1,2}^g=1 @ T{1:phi^a, 2:phi^a})", "--json")
    path = tmp_path / "s.json"
    path.write_text(json.dumps(json.loads(out)["series"]))
    assert run(capsys, "qme-check", "--action", str(path))[0] == EXIT_OK


def test_qme_non_solution(capsys, tmp_path):
    space = tmp_path / "q.json"
    space.write_text(qme_space().dumps())
    path = tmp_path / "s.txt"
    path.write_text("orb(QC{1,2,3,4}^g=0 @ T{1:phi^x, 2:phi^x, 3:phi^y, 4:phi^u})")
    code, out, _ = run(capsys, "qme-check", "--action", str(path), "--space", str(space), "--json")
    doc = json.loads(out)
    assert code == EXIT_FAIL
    assert not doc["residual_zero"] and not doc["exp_zero"] and doc["agree"]


def test_qme_rejects_an_odd_action(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("orb(QC{1,2,3}^g=0 @ T{1:phi^a, 2:phi^a, 3:phi^b})")
    assert run(capsys, "qme-check", "--action", str(path))[0] == EXIT_INPUT


def test_qme_parse_error_in_action(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("orb(QC{1,2}^g=1 @\n")
    assert run(capsys, "qme-check", "--action", str(path))[0] == EXIT_PARSE


def test_cross_check_command(capsys):
    code, out, _ = run(capsys, "cross-check", "theta", "--seed", "1", "--cases", "6", "--json")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["schema"] == "cross-check/1" and doc["rank"]["injective"]


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as err:
        main(["fuzz", "--operad", "nope", "--axioms", "mo"])
    assert err.value.code == 2

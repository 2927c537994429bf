import msgspec
import numpy as np
import pytest

import main as cli
from src.lie_core import SuMatrix, read_matrix, write_matrix
from src.report import decode_report


@pytest.fixture(autouse=True)
def no_jobs_env(monkeypatch):
    monkeypatch.delenv("EINSTEIN_LAB_JOBS", raising=False)


def run(tmp_path, *argv, name="report.json"):
    out = tmp_path / name
    code = cli.main([*argv, "--out", str(out)])
    return code, (decode_report(out.read_bytes()) if out.exists() else None)


def strip_wall_time(report):
    return msgspec.structs.replace(
        report, checks=[msgspec.structs.replace(c, wall_time=0.0) for c in report.checks]
    )


def test_constants_table(tmp_path, capsys):
    code, report = run(tmp_path, "constants", "--n", "2", "3")
    assert code == cli.EXIT_OK
    two, three = report.constants
    assert two.lambda_Q_over_E == pytest.approx(0.5)
    assert (two.c1, two.c2) == pytest.approx((-4.0, 0.0))
    assert three.c1 == pytest.approx(-48.0)
    assert three.closed_form_over_E4 == pytest.approx(5120.0 / 81.0)
    assert "Lambda_Q/E" in capsys.readouterr().out


def test_constants_json_to_stdout(capsys):
    assert cli.main(["constants", "--n", "3"]) == cli.EXIT_OK
    report = decode_report(capsys.readouterr().out.encode())
    assert [r.n for r in report.constants] == [3]


def test_verify_algebra(tmp_path):
    code, report = run(tmp_path, "verify", "--suite", "algebra", "--n", "2", "--seed", "1")
    assert code == cli.EXIT_OK
    assert report.checks and all(c.status == "pass" for c in report.checks)
    assert {c.suite for c in report.checks} == {"algebra"}
    assert [c.seq_id for c in report.checks] == list(range(1, len(report.checks) + 1))
    assert report.config["tolerances"]["algebra"] == 1e-10


def test_verify_is_reproducible(tmp_path):
    argv = ("verify", "--suite", "algebra", "--n", "3", "--seed", "4")
    _, first = run(tmp_path, *argv, name="a.json")
    _, second = run(tmp_path, *argv, "--jobs", "3", name="b.json")
    first, second = strip_wall_time(first), strip_wall_time(second)
    assert first.checks == second.checks


@pytest.mark.parametrize("argv", [
    ["verify", "--suite", "algebra", "--n", "1"],
    ["verify", "--fixture", "klein4"],
    ["classify"],
])
def test_usage_errors(argv):
    assert cli.main(argv) == cli.EXIT_USAGE


def test_unknown_flag_exits_with_usage_code():
    with pytest.raises(SystemExit) as err:
        cli.main(["verify", "--colour"])
    assert err.value.code == cli.EXIT_USAGE


def test_sample_and_classify(tmp_path):
    matrix = tmp_path / "member.json"
    assert cli.main(["sample", "--n", "2", "--seed", "7", "--out", str(matrix)]) == cli.EXIT_OK
    A = read_matrix(str(matrix))
    assert A.n == 2
    code, report = run(tmp_path, "classify", "--matrix", str(matrix), "--mc-samples", "2000", "--seed", "11")
    assert code == cli.EXIT_OK
    assert report.verdict.verdict == "integrable_to_second_order"
    assert report.verdict.in_hyperquadric


def test_classify_zero_matrix(tmp_path):
    matrix = tmp_path / "zero.json"
    write_matrix(SuMatrix(3, np.zeros((5, 5))), str(matrix))
    code, report = run(tmp_path, "classify", "--matrix", str(matrix), "--mc-samples", "50")
    assert code == cli.EXIT_OK
    assert report.verdict.verdict == "integrable_to_second_order"


def test_sample_odd_n_is_usage_error(tmp_path):
    assert cli.main(["sample", "--n", "3", "--out", str(tmp_path / "m.json")]) == cli.EXIT_USAGE


def test_malformed_matrix(tmp_path):
    matrix = tmp_path / "bad.json"
    matrix.write_text('{"n": 2, "re": [[1, 0], [0, 1]], "im": []}')
    code, report = run(tmp_path, "classify", "--matrix", str(matrix))
    assert code == cli.EXIT_USAGE
    assert report is None


def test_ragged_matrix_rows(tmp_path):
    matrix = tmp_path / "ragged.json"
    rows = [[0.0] * 4, [0.0] * 3, [0.0] * 4, [0.0] * 4]
    matrix.write_bytes(msgspec.json.encode({"n": 2, "re": rows, "im": np.zeros((4, 4)).tolist()}))
    code, report = run(tmp_path, "classify", "--matrix", str(matrix))
    assert code == cli.EXIT_USAGE
    assert report is None


def test_missing_matrix_file(tmp_path, capsys):
    code, report = run(tmp_path, "classify", "--matrix", str(tmp_path / "nope.json"))
    assert code == cli.EXIT_USAGE
    assert report is None
    assert "nope.json" in capsys.readouterr().err


@pytest.mark.slow
def test_classify_generic_n3_obstructed(tmp_path):
    from src.lie_core import random_su
    matrix = tmp_path / "generic.json"
    write_matrix(random_su(3, 17), str(matrix))
    code, report = run(tmp_path, "classify", "--matrix", str(matrix), "--mc-samples", "20000", "--seed", "4", "--jobs", "4")
    assert code == cli.EXIT_OK
    assert report.verdict.verdict == "obstructed"


@pytest.mark.slow
def test_verify_chart_torus(tmp_path):
    code, report = run(tmp_path, "verify", "--suite", "chart", "--fixture", "torus3", "--grid", "9")
    assert code == cli.EXIT_OK
    names = {c.name for c in report.checks}
    assert "second_variation_weak[torus3]" in names
    assert all(c.status == "pass" for c in report.checks)

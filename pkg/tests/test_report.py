import numpy as np
import pytest

from src.core.events import Status, inconclusive_result, residual_result, zscore_result
from src.grassmann.model import build_model
from src.integrate.sampler import HaarSampler
from src.lie_core import SuMatrix
from src.obstruct import classify, constants_summary
from src.report import (
    TOOL_NAME, build_report, decode_report, encode_report, render, render_constants, write_report,
)


@pytest.fixture(scope="module")
def results():
    return [
        residual_result("algebra", "kraines_norm", "g(Om, Om) = 6m(m+1)", 1e-13, 1e-10,
                        detail={"values": np.arange(3.0), "n": np.int64(2)}),
        zscore_result("integrate", "idXz", "int |X|^2 z_Y = E int z_X^2 z_Y", 4.0, 3.0, 5.0, 1000),
        inconclusive_result("obstruct", "proportionality_fit", "P = c P0", "all P0 values vanish"),
        residual_result("chart", "einstein", "Ric = E g", float("inf"), 1e-7),
    ]


def test_report_records_and_summary(results):
    report = build_report({"seed": 1}, results)
    assert report.tool == TOOL_NAME
    assert [r.status for r in report.checks] == ["pass", "inconclusive", "inconclusive", "fail"]
    assert report.summary == {"pass": 1, "fail": 1, "inconclusive": 2}
    # non-finite residuals are reported as null
    assert report.checks[2].residual is None and report.checks[3].residual is None
    assert report.checks[0].detail == {"values": [0.0, 1.0, 2.0], "n": 2}


def test_report_json_is_stable(results):
    report = build_report({"seed": 1, "n": [2, 3]}, results)
    raw = encode_report(report)
    assert encode_report(build_report({"seed": 1, "n": [2, 3]}, results)) == raw
    assert decode_report(raw) == report


def test_write_report(tmp_path, results):
    path = tmp_path / "report.json"
    report = build_report({}, results)
    write_report(report, str(path))
    assert decode_report(path.read_bytes()) == report


def test_render_checks(results):
    text = render(build_report({}, results))
    assert "kraines_norm" in text and "proportionality_fit" in text
    assert "fail=1" in text


def test_constants_rows():
    rows = [constants_summary(build_model(n)) for n in (2, 3)]
    report = build_report({}, constants=rows)
    two, three = report.constants
    assert two.E == pytest.approx(4.0)
    assert two.lambda_Q_over_E == pytest.approx(0.5, abs=1e-10)
    assert two.lambda_E_over_E == pytest.approx(0.5, abs=1e-10)
    assert (two.c1, two.c2) == pytest.approx((-4.0, 0.0))
    assert two.closed_form_over_E4 is None and two.closed_form == "6E^2 nu"
    assert three.lambda_Q_over_E == pytest.approx(0.6, abs=1e-10)
    assert three.lambda_E_over_E == pytest.approx(0.4, abs=1e-10)
    assert three.c1 == pytest.approx(-48.0)
    assert three.closed_form_over_E4 == pytest.approx(5120.0 / 81.0)
    text = render_constants(report.constants)
    assert "63.209877" in text and "6E^2 nu" in text


def test_verdict_record():
    model = build_model(3)
    verdict = classify(model, SuMatrix(3, np.zeros((5, 5))), HaarSampler(5, 0), 50)
    report = build_report({}, verdict=verdict)
    assert report.verdict.verdict == "integrable_to_second_order"
    assert report.verdict.in_hyperquadric
    assert len(report.verdict.pairing_zscores) == 24
    assert report.verdict.P_direct.n_samples == 50
    assert decode_report(encode_report(report)) == report
    assert "integrable_to_second_order" in render(report)

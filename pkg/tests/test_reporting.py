# tests/test_reporting.py
import json
import math

import pytest

from Laboratory.ClassA import Condition, ConditionReport, Verdict
from Laboratory.Reporting import (
    CONDITION_HEADER,
    RATE_HEADER,
    condition_rows,
    config_line,
    generate_summary_markdown,
    gnuplot_script,
    jsonable,
    markdown_table,
    render_csv,
    render_json,
    write_report,
    write_summary,
)

CONFIG = {"kernel": {"catalog": "box"}, "target": {"x0": 0.5, "y0": 0.5, "lambda0": "inf"}}


def test_csv_starts_with_the_config_line():
    text = render_csv(("j", "value"), [[0, 0.1], [1, 1.0 / 3.0]], CONFIG)
    lines = text.splitlines()
    assert lines[0].startswith("# config=")
    assert json.loads(lines[0][len("# config="):]) == CONFIG
    assert lines[1] == "j,value"
    assert lines[2] == "0,0.10000000000000001"
    assert float(lines[3].split(",")[1]) == 1.0 / 3.0


def test_csv_cells():
    text = render_csv(("a", "b", "c", "d"), [[True, None, Verdict.FAIL, math.inf]], CONFIG)
    assert text.splitlines()[-1] == "true,,Fail,inf"


def test_config_line_is_key_sorted():
    assert config_line({"b": 1, "a": 2}) == '# config={"a":2,"b":1}'


def test_json_puts_config_first():
    text = render_json({"verdict": Verdict.PASS, "values": [1.0, math.inf]}, CONFIG)
    body = json.loads(text)
    assert list(body)[0] == "config"
    assert body["config"] == CONFIG
    assert body["verdict"] == "Pass"
    assert body["values"] == [1.0, "inf"]


def test_jsonable_dumps_models():
    report = ConditionReport(condition=Condition.A, verdict=Verdict.PASS, measurements=[[1.0, 1.0]], margin=0.5)
    data = jsonable(report)
    assert data["condition"] == "A"
    assert data["verdict"] == "Pass"
    assert data["measurements"] == [[1.0, 1.0]]


def test_write_report_modes(tmp_path):
    paths = write_report(tmp_path, "validate", "both", CONFIG, {"ok": True}, ("x",), [[1.0]])
    assert sorted(p.name for p in paths) == ["validate.csv", "validate.json"]
    only_json = write_report(tmp_path / "json", "rate", "json", CONFIG, {}, ("x",), [])
    assert [p.name for p in only_json] == ["rate.json"]
    with pytest.raises(ValueError, match="Unknown report format"):
        write_report(tmp_path, "rate", "xml", CONFIG, {}, ("x",), [])


def test_write_report_is_deterministic(tmp_path):
    for name in ("first", "second"):
        write_report(tmp_path / name, "validate", "both", CONFIG, {"values": [0.1, 0.2]}, ("x",), [[0.1], [0.2]])
    for suffix in ("csv", "json"):
        first = (tmp_path / "first" / f"validate.{suffix}").read_bytes()
        assert first == (tmp_path / "second" / f"validate.{suffix}").read_bytes()


def test_condition_rows():
    reports = [
        ConditionReport(condition=Condition.A, verdict=Verdict.PASS, measurements=[[1.0, 1.0], [2.0, 1.0]], margin=0.5),
        ConditionReport(condition=Condition.F, verdict=Verdict.INCONCLUSIVE),
    ]
    rows = condition_rows(reports)
    assert len(rows) == 3
    assert rows[0][:4] == [Condition.A, Verdict.PASS, 0.5, 0]
    assert rows[1][4] == "2 1"
    assert rows[2][3] == ""
    assert len(CONDITION_HEADER) == len(rows[0])


def test_rate_header_width():
    assert len(RATE_HEADER) == 17
    assert RATE_HEADER[5] == "Delta"


def test_markdown_summary(tmp_path):
    text = generate_summary_markdown("Class A validation", {"kernel": "box", "overall": Verdict.PASS},
                                     [("Conditions", markdown_table(("condition", "verdict"), [["A", "Pass"]]))])
    assert text.startswith("# Class A validation\n")
    assert "| kernel | box |" in text
    assert "## Conditions" in text

    md_path, html_path = write_summary(tmp_path, "Class A validation", {"kernel": "box"}, [])
    assert md_path.name == "summary.md"
    html = html_path.read_text(encoding="utf-8")
    assert "<table>" in html
    assert "<title>Class A validation</title>" in html


def test_gnuplot_script():
    script = gnuplot_script("rate.csv", 4, {"Delta": 6, "op_error": 13})
    assert "set datafile separator ','" in script
    assert "set logscale xy" in script
    assert "'rate.csv' using 4:6 with linespoints title 'Delta'" in script
    assert "using 4:13" in script
    assert "logscale" not in gnuplot_script("rate.csv", 4, {"Delta": 6}, logscale=False)

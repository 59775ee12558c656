# Laboratory/Reporting.py
"""
Report files for every command: CSV (17 significant digits, resolved config on the first
line), JSON (resolved config under "config"), summary.md and summary.html.
Report bodies carry no timestamps, so identical runs give identical files.
"""

import csv
import io
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import markdown as md
from pydantic import BaseModel

from Initialization import format_float

REPORT_MODES = {"csv": ("csv",), "json": ("json",), "both": ("csv", "json")}


def jsonable(value: Any) -> Any:
    """Plain JSON data: models dumped, enums by value, non-finite floats as 'inf' / '-inf' / 'nan'."""
    if isinstance(value, BaseModel):
        return jsonable(value.model_dump())
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Mapping):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, Enum):
        return str(value.value)
    if value is None:
        return ""
    return str(value)


def config_line(config: Mapping[str, Any]) -> str:
    return "# config=" + json.dumps(jsonable(config), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], config: Mapping[str, Any]) -> str:
    buffer = io.StringIO()
    buffer.write(config_line(config) + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def render_json(payload: Mapping[str, Any], config: Mapping[str, Any]) -> str:
    body = {"config": jsonable(config), **jsonable(payload)}
    return json.dumps(body, indent=2, ensure_ascii=False) + "\n"


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def write_report(
    out_dir: Path,
    stem: str,
    fmt: str,
    config: Mapping[str, Any],
    payload: Mapping[str, Any],
    header: Sequence[str],
    rows: Sequence[Sequence[Any]],
) -> List[Path]:
    """Writes <stem>.csv and/or <stem>.json according to fmt (csv | json | both)."""
    if fmt not in REPORT_MODES:
        raise ValueError(f"Unknown report format '{fmt}'. Use one of {sorted(REPORT_MODES)}")
    written = []
    for kind in REPORT_MODES[fmt]:
        if kind == "csv":
            written.append(_write(out_dir / f"{stem}.csv", render_csv(header, rows, config)))
        else:
            written.append(_write(out_dir / f"{stem}.json", render_json(payload, config)))
    return written


# --- Row layouts ---

CONDITION_HEADER = ("condition", "verdict", "margin", "j", "measurement")


def condition_rows(reports: Sequence[Any]) -> List[List[Any]]:
    rows = []
    for report in reports:
        if not report.measurements:
            rows.append([report.condition, report.verdict, report.margin, "", ""])
        for j, measurement in enumerate(report.measurements):
            rows.append([report.condition, report.verdict, report.margin, j, " ".join(map(format_float, measurement))])
    return rows


TRACE_HEADER = ("h", "k", "quotient")
CONVERGENCE_HEADER = ("j", "x", "y", "lambda", "value", "error")
RATE_HEADER = (
    "j", "x", "y", "lambda", "delta", "Delta", "h41", "h42a", "h42b",
    "ii", "iii", "iv", "op_error", "ratio_ii", "ratio_iii", "ratio_iv", "ratio_conclusion",
)


def convergence_rows(report: Any) -> List[List[Any]]:
    return [[j, *point, value, error]
            for j, (point, value, error) in enumerate(zip(report.points, report.values, report.errors))]


def rate_rows(report: Any) -> List[List[Any]]:
    def column(values: Optional[List[float]], j: int) -> Optional[float]:
        return values[j] if values and j < len(values) else None

    rows = []
    for j, (x, y, lam) in enumerate(report.points):
        rows.append([
            j, x, y, lam, report.deltas[j],
            column(report.delta_values, j),
            column(report.hypothesis_41, j),
            column(report.hypothesis_42[0], j),
            column(report.hypothesis_42[1], j),
            column(report.condition_values.get("ii"), j),
            column(report.condition_values.get("iii"), j),
            column(report.condition_values.get("iv"), j),
            column(report.operator_error, j),
            column(report.ratios.get("ii"), j),
            column(report.ratios.get("iii"), j),
            column(report.ratios.get("iv"), j),
            column(report.ratios.get("conclusion"), j),
        ])
    return rows


# --- Summaries ---

def markdown_table(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(_cell(v) for v in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def generate_summary_markdown(title: str, overview: Dict[str, Any], sections: Sequence[tuple]) -> str:
    """Markdown summary: a title, a key/value overview table, then (heading, body) sections."""
    report_md = f"# {title}\n\n"
    report_md += markdown_table(("item", "value"), overview.items()) + "\n"
    for heading, body in sections:
        report_md += f"## {heading}\n\n{body}\n\n"
    return report_md


def render_summary_html(md_text: str, title: str) -> str:
    html_body = md.markdown(md_text, extensions=['markdown.extensions.tables', 'markdown.extensions.fenced_code'])
    return f"""<!DOCTYPE html>
<html>
<head>
<meta charset="UTF-8">
<title>{title}</title>
<style>
body {{ font-family: sans-serif; line-height: 1.5; font-size: 11pt; color: #333; max-width: 60em; margin: 2em auto; }}
table {{ border-collapse: collapse; margin-bottom: 1.2em; }}
th, td {{ border: 1px solid #ccc; padding: 4px 8px; text-align: left; }}
th {{ background-color: #f2f2f2; }}
code, pre {{ font-size: 10pt; }}
</style>
</head>
<body>{html_body}</body>
</html>
"""


def write_summary(out_dir: Path, title: str, overview: Dict[str, Any], sections: Sequence[tuple]) -> List[Path]:
    md_text = generate_summary_markdown(title, overview, sections)
    return [
        _write(out_dir / "summary.md", md_text),
        _write(out_dir / "summary.html", render_summary_html(md_text, title)),
    ]


def gnuplot_script(csv_name: str, x_column: int, y_columns: Dict[str, int], *, logscale: bool = True) -> str:
    """Plain-text gnuplot script plotting CSV columns (1-based) against x_column."""
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set datafile commentschars '#'",
    ]
    if logscale:
        lines.append("set logscale xy")
    plots = [f"'{csv_name}' using {x_column}:{column} with linespoints title '{label}'"
             for label, column in y_columns.items()]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def write_gnuplot(out_dir: Path, name: str, script: str) -> Path:
    return _write(out_dir / name, script)

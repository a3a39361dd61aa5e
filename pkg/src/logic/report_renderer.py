"""
Report Renderer Module

Renders cohesion reports as an aligned text table, CSV or JSON. Values are
rounded half away from zero for display; absent indices render as "-" in
tables, as empty fields in CSV and as null in JSON.
"""

import json
from typing import List, Optional, Sequence

import pandas as pd

from ..errors import ReportError, UsageError
from ..models.report import CohesionReport, ModuleCohesion
from .metrics import display_delta, format_index, round_display

REPORT_FORMATS = ("table", "csv", "json")

TABLE_COLUMNS = ["version", "CoI(J)", "CoI(AJ)", "Average"]
DATA_COLUMNS = ["version", "coi_classes", "coi_aspects", "average"]


def reports_to_frame(reports: Sequence[CohesionReport], decimals: int = 2,
                     absent: Optional[str] = "-") -> pd.DataFrame:
    """
    Build a display DataFrame of reports.

    Args:
        reports: Reports to tabulate
        decimals: Display precision
        absent: Cell value for an absent index

    Returns:
        DataFrame with version, CoI(J), CoI(AJ) and Average columns, values as fixed-point strings
    """
    rows = []
    for report in reports:
        rows.append([
            report.version_label,
            _cell(report.coi_classes, decimals, absent),
            _cell(report.coi_aspects, decimals, absent),
            _cell(report.combined, decimals, absent),
        ])
    return pd.DataFrame(rows, columns=TABLE_COLUMNS)


def _cell(value: Optional[float], decimals: int, absent: Optional[str]) -> Optional[str]:
    text = format_index(value, decimals)
    return absent if text is None else text


def render_report(reports: Sequence[CohesionReport], fmt: str = "table", decimals: int = 2) -> str:
    """
    Render reports in the requested format.

    Args:
        reports: Non-empty list of reports
        fmt: One of "table", "csv", "json"
        decimals: Display precision

    Returns:
        Rendered text ending with a newline

    Raises:
        UsageError: on an unknown format
        ReportError: on an empty report list
    """
    if fmt not in REPORT_FORMATS:
        raise UsageError(f"unknown report format {fmt!r} (choose from {', '.join(REPORT_FORMATS)})")
    if not reports:
        raise ReportError("no reports to render")

    if fmt == "table":
        frame = reports_to_frame(reports, decimals, absent="-")
        return frame.to_string(index=False) + "\n"

    if fmt == "csv":
        frame = reports_to_frame(reports, decimals, absent="")
        frame.columns = DATA_COLUMNS
        return frame.to_csv(index=False, lineterminator="\n")

    payload = []
    for report in reports:
        payload.append({
            "version": report.version_label,
            "coi_classes": _json_number(report.coi_classes, decimals),
            "coi_aspects": _json_number(report.coi_aspects, decimals),
            "average": _json_number(report.combined, decimals),
        })
    return json.dumps(payload, indent=2) + "\n"


def _json_number(value: Optional[float], decimals: int) -> Optional[float]:
    if value is None:
        return None
    return float(round_display(value, decimals))


def render_summary_line(report: CohesionReport, decimals: int = 2) -> str:
    """
    One-line summary, e.g. ``iot-java: CoI(J)=0.19, CoI(AJ)=-, avg=0.19``.

    Args:
        report: Report to summarize
        decimals: Display precision

    Returns:
        Summary line without trailing newline
    """
    classes = format_index(report.coi_classes, decimals) or "-"
    aspects = format_index(report.coi_aspects, decimals) or "-"
    average = format_index(report.combined, decimals)
    return f"{report.version_label}: CoI(J)={classes}, CoI(AJ)={aspects}, avg={average}"


def render_comparison(left: CohesionReport, right: CohesionReport,
                      fmt: str = "table", decimals: int = 2) -> str:
    """
    Two-row report followed by the display-level CoI(J) delta.

    Args:
        left: Baseline version
        right: Compared version
        fmt: Report format
        decimals: Display precision

    Returns:
        Rendered comparison
    """
    body = render_report([left, right], fmt, decimals)
    delta = display_delta(left.coi_classes, right.coi_classes, decimals)
    if fmt == "json":
        document = json.loads(body)
        return json.dumps({"reports": document, "delta_coi_classes": delta}, indent=2) + "\n"
    if fmt == "csv":
        return body + f"delta_coi_classes,{delta}\n"
    return body + f"delta CoI(J): {delta}\n"


def render_breakdown(rows: List[ModuleCohesion], spread: dict, decimals: int = 2) -> str:
    """
    Render the per-module breakdown and the scattered concerns.

    Args:
        rows: Output of module_breakdown
        spread: Output of concern_spread
        decimals: Display precision

    Returns:
        Text block with a module table and one line per scattered concern
    """
    frame = pd.DataFrame(
        [[r.name, r.kind, r.functionality_count, format_index(r.cohesion, decimals)] for r in rows],
        columns=["module", "kind", "f", "1/f"],
    )
    lines = [frame.to_string(index=False)]
    scattered = {tag: modules for tag, modules in spread.items() if len(modules) > 1}
    if scattered:
        lines.append("scattered concerns:")
        for tag, modules in scattered.items():
            lines.append(f"  {tag}: {', '.join(modules)}")
    return "\n".join(lines) + "\n"

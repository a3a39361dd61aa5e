"""
Export Section Component Module

Download buttons for cohesion reports (CSV, JSON, Excel) and traces (JSONL).
"""

import hashlib
from datetime import datetime

import streamlit as st

from src.logic.exporter import ExcelExporter
from src.logic.manifest_parser import write_manifest
from src.logic.metrics import build_report, module_breakdown
from src.logic.report_renderer import render_report
from src.logic.scenario_runner import render_trace
from src.utils.file_handlers import read_temp_bytes

XLSX_MIME = "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet"


def _calculate_export_hash(manifests, decimals: int) -> str:
    """
    Hash of the loaded manifests and display precision.

    Returns:
        MD5 hex digest
    """
    hash_components = [str(decimals)] + [write_manifest(manifest) for manifest in manifests.values()]
    return hashlib.md5("\n".join(hash_components).encode()).hexdigest()


def _xlsx_bytes(reports, breakdowns, decimals: int) -> bytes:
    exporter = ExcelExporter(decimals=decimals)

    def write(path):
        if not exporter.export_reports(reports, path, breakdowns):
            raise OSError("Excel export failed")

    return read_temp_bytes(".xlsx", write)


def render_report_export():
    manifests = st.session_state.manifests
    if not manifests:
        st.info("ℹ️ Load manifests to export cohesion reports.")
        return

    decimals = st.session_state.report_settings.decimals
    reports = [build_report(manifest) for manifest in manifests.values()]
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")

    st.download_button("📄 Report CSV", data=render_report(reports, "csv", decimals),
                       file_name=f"cohesion_{timestamp}.csv", mime="text/csv", use_container_width=True)
    st.download_button("🧾 Report JSON", data=render_report(reports, "json", decimals),
                       file_name=f"cohesion_{timestamp}.json", mime="application/json", use_container_width=True)

    export_hash = _calculate_export_hash(manifests, decimals)
    if st.session_state.export_xlsx_bytes is None or st.session_state.export_hash != export_hash:
        try:
            with st.spinner("⏳ Building workbook..."):
                breakdowns = {label: module_breakdown(manifest) for label, manifest in manifests.items()}
                st.session_state.export_xlsx_bytes = _xlsx_bytes(reports, breakdowns, decimals)
        except OSError as e:
            st.error(f"❌ Error exporting workbook: {e}")
            st.session_state.export_xlsx_bytes = None
        st.session_state.export_hash = export_hash

    if st.session_state.export_xlsx_bytes is not None:
        st.download_button("📥 Report Excel", data=st.session_state.export_xlsx_bytes,
                           file_name=f"cohesion_{timestamp}.xlsx", mime=XLSX_MIME, type="primary",
                           use_container_width=True)


def render_trace_export():
    for mode, result in st.session_state.simulation_results.items():
        st.download_button(f"🧵 Trace {mode.value} (JSONL)", data=render_trace(result.trace),
                           file_name=f"trace-{mode.value}.jsonl", mime="application/x-ndjson",
                           use_container_width=True, key=f"trace_download_{mode.value}")


def render_export_section():
    """Render the export section."""
    st.divider()
    st.subheader("📥 Export")
    render_report_export()
    render_trace_export()

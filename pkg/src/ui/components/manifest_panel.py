"""
Manifest Panel Component Module

Loads concern manifests (shipped or uploaded) and shows their cohesion
reports, a two-version comparison and the per-module breakdown.
"""

from pathlib import Path

import streamlit as st

from src.errors import AspectIoTError
from src.logic.experiment import GOLDEN_MANIFEST_DIR
from src.logic.manifest_parser import MANIFEST_EXTENSION, load_manifest, parse_manifest
from src.logic.metrics import build_report, concern_spread, display_delta, format_index, module_breakdown
from src.logic.report_renderer import reports_to_frame
from src.state.session_manager import reset_export_state, reset_manifest_state
from src.utils.file_handlers import (
    MANIFEST_EXTENSIONS,
    read_uploaded_text,
    validate_file_extension,
    version_label_for,
)


def load_shipped_manifests():
    """Load every manifest shipped with the project into session state."""
    for path in sorted(Path(GOLDEN_MANIFEST_DIR).glob(f"*{MANIFEST_EXTENSION}")):
        try:
            manifest = load_manifest(path)
        except AspectIoTError as e:
            st.session_state.manifest_errors[path.name] = str(e)
            continue
        st.session_state.manifests[manifest.version_label] = manifest
    st.session_state.shipped_loaded = True
    reset_export_state()


def _load_uploads(uploaded_files):
    for uploaded_file in uploaded_files:
        is_valid, _ = validate_file_extension(uploaded_file.name, MANIFEST_EXTENSIONS)
        if not is_valid:
            st.session_state.manifest_errors[uploaded_file.name] = "not a manifest file (.cm)"
            continue
        try:
            text = read_uploaded_text(uploaded_file)
            manifest = parse_manifest(text, default_label=version_label_for(uploaded_file.name))
        except (AspectIoTError, UnicodeDecodeError) as e:
            st.session_state.manifest_errors[uploaded_file.name] = str(e)
            continue
        st.session_state.manifest_errors.pop(uploaded_file.name, None)
        if manifest.version_label not in st.session_state.manifests:
            reset_export_state()
        st.session_state.manifests[manifest.version_label] = manifest


def render_manifest_loader():
    """Render the manifest source controls."""
    st.subheader("Concern Manifests")

    col1, col2 = st.columns([1, 1])
    with col1:
        if st.button("Load shipped manifests", type="primary", use_container_width=True):
            load_shipped_manifests()
    with col2:
        if st.button("Clear manifests", use_container_width=True):
            reset_manifest_state()
            st.rerun()

    uploaded_files = st.file_uploader(
        "Upload manifests",
        type=[ext.lstrip(".") for ext in MANIFEST_EXTENSIONS],
        accept_multiple_files=True,
        help="One module declaration per line: 'class Name: tag, tag' or 'aspect Name: tag'"
    )
    if uploaded_files:
        _load_uploads(uploaded_files)

    for file_name, message in st.session_state.manifest_errors.items():
        st.error(f"❌ {file_name}: {message}")


def render_report_table():
    """Render the cohesion report of every loaded manifest."""
    manifests = st.session_state.manifests
    if not manifests:
        st.info("📁 Load the shipped manifests or upload a .cm file to begin")
        return

    decimals = st.session_state.report_settings.decimals
    reports = [build_report(manifest) for manifest in manifests.values()]
    st.dataframe(reports_to_frame(reports, decimals), hide_index=True, use_container_width=True)


def render_comparison():
    """Render a side-by-side comparison of two loaded versions."""
    manifests = st.session_state.manifests
    if len(manifests) < 2:
        return

    settings = st.session_state.report_settings
    labels = list(manifests)
    left_default = labels.index(settings.tangled_label) if settings.tangled_label in labels else 0
    right_default = labels.index(settings.woven_label) if settings.woven_label in labels else 1

    st.markdown("**Compare versions**")
    col1, col2, col3 = st.columns([2, 2, 1])
    with col1:
        left_label = st.selectbox("Baseline", labels, index=left_default, key="compare_left")
    with col2:
        right_label = st.selectbox("Compared", labels, index=right_default, key="compare_right")

    left = build_report(manifests[left_label])
    right = build_report(manifests[right_label])
    with col3:
        st.metric(
            "CoI(J)",
            format_index(right.coi_classes, settings.decimals) or "-",
            delta=display_delta(left.coi_classes, right.coi_classes, settings.decimals),
        )


def render_breakdown():
    """Render per-module cohesion and scattered concerns of each manifest."""
    decimals = st.session_state.report_settings.decimals
    for label, manifest in st.session_state.manifests.items():
        with st.expander(f"🔍 {label}: modules and concerns", expanded=False):
            rows = module_breakdown(manifest)
            st.dataframe(
                [{"module": r.name, "kind": r.kind, "f": r.functionality_count,
                  "1/f": format_index(r.cohesion, decimals)} for r in rows],
                hide_index=True,
                use_container_width=True,
            )
            scattered = {tag: modules for tag, modules in concern_spread(manifest).items() if len(modules) > 1}
            if scattered:
                st.markdown("Scattered concerns:")
                for tag, modules in scattered.items():
                    st.markdown(f"- `{tag}`: {', '.join(modules)}")
            else:
                st.caption("No concern is declared by more than one module.")


def render_manifest_panel():
    """Render the whole manifest section."""
    render_manifest_loader()
    render_report_table()
    render_comparison()
    render_breakdown()

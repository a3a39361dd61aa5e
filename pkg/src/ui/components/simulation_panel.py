"""
Simulation Panel Component Module

Runs a scenario against the tangled and woven builds, shows the traces and
checks that they are equivalent. Also runs the full demo measurement.
"""

from pathlib import Path

import pandas as pd
import streamlit as st

from src.errors import AspectIoTError, VerificationError
from src.logic.experiment import DEMO_SCENARIO, PROJECT_ROOT, run_demo
from src.logic.report_renderer import reports_to_frame
from src.logic.scenario_parser import SCENARIO_EXTENSION, parse_scenario
from src.logic.scenario_runner import first_divergence, run_scenario
from src.models.aop import BuildMode
from src.state.session_manager import reset_export_state, reset_simulation_state
from src.utils.file_handlers import SCENARIO_EXTENSIONS, read_uploaded_text, validate_file_extension

SCENARIO_DIR = PROJECT_ROOT / "scenarios"
TRACE_COLUMNS = ["tick", "actor", "kind", "module", "op", "source", "detail"]


def trace_frame(trace) -> pd.DataFrame:
    """Tabulate a trace, one event per row, detail as compact text."""
    rows = []
    for event in trace:
        row = event.to_dict()
        row["detail"] = ", ".join(f"{key}={value}" for key, value in row["detail"].items())
        rows.append(row)
    return pd.DataFrame(rows, columns=TRACE_COLUMNS)


def _scenario_sources():
    sources = {"Demo scenario": DEMO_SCENARIO}
    for path in sorted(Path(SCENARIO_DIR).glob(f"*{SCENARIO_EXTENSION}")):
        sources[path.name] = path.read_text(encoding="utf-8")
    return sources


def render_scenario_selector():
    """Pick the scenario text: demo, shipped file or upload."""
    sources = _scenario_sources()
    choice = st.selectbox("Scenario", list(sources) + ["Upload..."], key="scenario_choice")
    if choice == "Upload...":
        uploaded_file = st.file_uploader("Upload scenario", type=[ext.lstrip(".") for ext in SCENARIO_EXTENSIONS])
        if uploaded_file is None:
            return
        is_valid, _ = validate_file_extension(uploaded_file.name, SCENARIO_EXTENSIONS)
        if not is_valid:
            st.error("❌ Invalid file type. Please upload a scenario file (.scn)")
            return
        text, name = read_uploaded_text(uploaded_file), uploaded_file.name
    else:
        text, name = sources[choice], choice

    if name != st.session_state.scenario_name or text != st.session_state.scenario_text:
        reset_simulation_state()
        st.session_state.scenario_text = text
        st.session_state.scenario_name = name

    with st.expander("📝 Scenario source", expanded=False):
        st.code(text, language=None)


def _run(modes, seed):
    try:
        scenario = parse_scenario(st.session_state.scenario_text)
    except AspectIoTError as e:
        st.error(f"❌ Scenario error: {e}")
        return
    if seed is not None:
        scenario = scenario.with_seed(seed)
    results = {}
    with st.spinner("⏳ Running scenario..."):
        try:
            for mode in modes:
                results[mode] = run_scenario(scenario, mode, st.session_state.simulation_settings)
        except AspectIoTError as e:
            st.error(f"❌ Simulation failed: {type(e).__name__}: {e}")
            return
    st.session_state.simulation_results = results


def render_simulation_controls():
    col1, col2, col3 = st.columns([2, 1, 1])
    with col1:
        mode_values = st.multiselect(
            "Builds",
            [mode.value for mode in BuildMode],
            default=[mode.value for mode in BuildMode],
            help="Run the scenario against one or both builds"
        )
    with col2:
        override = st.checkbox("Override seed", value=False)
    with col3:
        seed = st.number_input("Seed", min_value=0, value=42, step=1, disabled=not override)

    if st.button("▶ Run scenario", type="primary", disabled=not mode_values or not st.session_state.scenario_text):
        _run([BuildMode(value) for value in mode_values], int(seed) if override else None)


def render_results():
    results = st.session_state.simulation_results
    if not results:
        return

    for result in results.values():
        st.markdown(f"**{result.summary()}**")

    if len(results) == 2:
        divergence = first_divergence(results[BuildMode.TANGLED].trace, results[BuildMode.WOVEN].trace)
        if divergence is None:
            st.success("✅ Tangled and woven traces are equivalent (ignoring the source field)")
        else:
            st.error(f"❌ Traces diverge at event {divergence}")

    tabs = st.tabs([mode.value for mode in results])
    for tab, (mode, result) in zip(tabs, results.items()):
        with tab:
            frame = trace_frame(result.trace)
            kinds = sorted(frame["kind"].unique()) if not frame.empty else []
            selected = st.multiselect("Event kinds", kinds, default=kinds, key=f"kinds_{mode.value}")
            st.dataframe(frame[frame["kind"].isin(selected)], hide_index=True, use_container_width=True)
            if mode is BuildMode.WOVEN and result.middleware.weave_report is not None:
                with st.expander("🧵 Advice attached per operation", expanded=False):
                    st.dataframe(
                        pd.DataFrame(result.middleware.weave_report.rows(),
                                     columns=["module", "op", "aspect", "phase", "precedence", "rank"]),
                        hide_index=True,
                        use_container_width=True,
                    )
                executions = result.middleware.registry.execution_counts()
                with st.expander(f"⚙️ Advice executions ({sum(row[-1] for row in executions)})", expanded=False):
                    st.dataframe(
                        pd.DataFrame(executions, columns=["aspect", "phase", "module", "op", "count"]),
                        hide_index=True,
                        use_container_width=True,
                    )


def render_demo_runner():
    """Run the full measurement and show its verifications."""
    st.subheader("🧪 Full Measurement")
    st.caption("Emit both manifests, check them against the shipped ones, compare traces and compute cohesion.")
    if not st.button("Run demo"):
        return
    try:
        with st.spinner("⏳ Running demo..."):
            outcome = run_demo(settings=st.session_state.report_settings)
    except VerificationError as e:
        st.error(f"❌ {e}")
        return
    except AspectIoTError as e:
        st.error(f"❌ Demo failed: {type(e).__name__}: {e}")
        return

    for check in outcome.checks:
        st.markdown(f"✅ {check}")
    st.dataframe(reports_to_frame(outcome.reports, st.session_state.report_settings.decimals),
                 hide_index=True, use_container_width=True)
    for manifest in outcome.manifests.values():
        st.session_state.manifests[manifest.version_label] = manifest
    st.session_state.simulation_results = dict(outcome.runs)
    st.session_state.scenario_name = "Demo scenario"
    st.session_state.scenario_text = DEMO_SCENARIO
    reset_export_state()


def render_simulation_panel():
    """Render the whole simulation section."""
    st.divider()
    st.subheader("📡 Middleware Simulation")
    render_scenario_selector()
    render_simulation_controls()
    render_results()
    st.divider()
    render_demo_runner()

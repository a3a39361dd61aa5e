"""
Settings Sidebar Component Module

Edits report display settings and the protocol constants of the simulated
middleware.
"""

import streamlit as st

from src.models.report import ReportSettings
from src.models.settings import CacheConfig, SimulationSettings
from src.state.session_manager import reset_all_state, reset_export_state


def render_report_settings_section():
    """Render the Report Display section."""
    with st.expander("📊 Report Display", expanded=False):
        settings = st.session_state.report_settings
        decimals = st.number_input("Decimals", min_value=0, max_value=6, value=settings.decimals, step=1,
                                   help="Indices are rounded half away from zero for display")
        tangled_label = st.text_input("Tangled version label", value=settings.tangled_label)
        woven_label = st.text_input("Woven version label", value=settings.woven_label)

        updated = ReportSettings(int(decimals), tangled_label.strip() or settings.tangled_label,
                                 woven_label.strip() or settings.woven_label)
        if updated != settings:
            st.session_state.report_settings = updated
            reset_export_state()


def render_protocol_settings_section():
    """Render the Protocol section."""
    with st.expander("📡 Protocol", expanded=False):
        settings = st.session_state.simulation_settings
        chunk_size = st.slider("Chunk size (bytes)", min_value=16, max_value=256, value=settings.chunk_size, step=16)
        ack_timeout = st.number_input("ACK timeout (ticks)", min_value=1, value=settings.ack_timeout_ticks)
        handshake_timeout = st.number_input("Handshake timeout (ticks)", min_value=1,
                                            value=settings.handshake_timeout_ticks)
        max_retries = st.number_input("Max retries", min_value=0, value=settings.max_retries)
        capabilities = st.text_input("Capabilities", value=", ".join(settings.default_capabilities),
                                     help="Comma-separated list advertised by every device")

        st.markdown("**Reading cache**")
        capacity = st.number_input("Capacity", min_value=1, value=settings.cache.capacity)
        ttl = st.number_input("TTL (ticks)", min_value=1, value=settings.cache.ttl_ticks)

        try:
            updated = SimulationSettings(
                chunk_size=int(chunk_size),
                ack_timeout_ticks=int(ack_timeout),
                max_retries=int(max_retries),
                handshake_timeout_ticks=int(handshake_timeout),
                protocol_version=settings.protocol_version,
                default_capabilities=tuple(c.strip() for c in capabilities.split(",") if c.strip()),
                cache=CacheConfig(int(capacity), int(ttl)),
            )
        except ValueError as e:
            st.error(f"❌ {e}")
            return
        if updated != settings:
            st.session_state.simulation_settings = updated
            st.session_state.simulation_results = {}

        if st.button("Restore defaults", use_container_width=True):
            st.session_state.simulation_settings = SimulationSettings()
            st.session_state.simulation_results = {}
            st.rerun()


def render_settings_sidebar():
    """Render all settings sections."""
    st.header("⚙️ Settings")
    render_report_settings_section()
    render_protocol_settings_section()

    if st.button("Reset session", use_container_width=True, help="Clear manifests, scenario runs and exports"):
        reset_all_state()
        st.rerun()

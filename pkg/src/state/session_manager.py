"""
Session State Manager Module

Centralized management of Streamlit session state variables.
Provides functions to initialize, reset, and clear session state.
"""

import streamlit as st

from src.models.report import ReportSettings
from src.models.settings import SimulationSettings


def initialize_session_state():
    """
    Initialize all session state variables with their default values.

    This function should be called at the start of the application
    to ensure all required session state variables exist.
    """
    if 'manifests' not in st.session_state:
        # version label -> ConcernManifest, in load order
        st.session_state.manifests = {}
    if 'manifest_errors' not in st.session_state:
        st.session_state.manifest_errors = {}
    if 'shipped_loaded' not in st.session_state:
        st.session_state.shipped_loaded = False
    if 'report_settings' not in st.session_state:
        st.session_state.report_settings = ReportSettings()
    if 'simulation_settings' not in st.session_state:
        st.session_state.simulation_settings = SimulationSettings()
    if 'scenario_text' not in st.session_state:
        st.session_state.scenario_text = None
    if 'scenario_name' not in st.session_state:
        st.session_state.scenario_name = None
    if 'simulation_results' not in st.session_state:
        # BuildMode -> SimulationResult
        st.session_state.simulation_results = {}
    if 'export_xlsx_bytes' not in st.session_state:
        st.session_state.export_xlsx_bytes = None
    if 'export_hash' not in st.session_state:
        st.session_state.export_hash = None


def reset_manifest_state():
    """Forget every loaded manifest and the cached export."""
    st.session_state.manifests = {}
    st.session_state.manifest_errors = {}
    st.session_state.shipped_loaded = False
    reset_export_state()


def reset_simulation_state():
    """Forget the loaded scenario and its runs."""
    st.session_state.scenario_text = None
    st.session_state.scenario_name = None
    st.session_state.simulation_results = {}


def reset_export_state():
    st.session_state.export_xlsx_bytes = None
    st.session_state.export_hash = None


def reset_all_state():
    """
    Reset all session state.

    Settings are kept; loaded manifests, scenarios, runs and exports are cleared.
    """
    reset_manifest_state()
    reset_simulation_state()

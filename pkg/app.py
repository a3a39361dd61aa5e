#!/usr/bin/env python3
"""
Aspect IoT Cohesion Lab - Streamlit Application

A dashboard for the tangled and woven builds of the simulated IoT middleware.
This application allows users to:
- Load the shipped concern manifests or upload their own
- Compare cohesion indices of two versions and inspect per-module counts
- Run scenarios against either build and check their traces are equivalent
- Run the full measurement with its verifications
- Export reports (CSV, JSON, Excel) and traces (JSONL)

The application is built with Streamlit and follows a modular component architecture.
"""

import streamlit as st

# UI Components
from src.ui.styles.theme import inject_theme
from src.ui.components.header import render_header
from src.ui.components.manifest_panel import render_manifest_panel
from src.ui.components.simulation_panel import render_simulation_panel

# Sidebar Components
from src.ui.sidebar.settings_sidebar import render_settings_sidebar
from src.ui.sidebar.export_section import render_export_section

# State Management
from src.state.session_manager import initialize_session_state
from src.ui.components.manifest_panel import load_shipped_manifests

# ============================================================================
# Page Configuration
# ============================================================================

st.set_page_config(
    page_title="Aspect IoT Cohesion Lab",
    page_icon="🧩",
    layout="wide"
)

# ============================================================================
# Application Initialization
# ============================================================================

inject_theme()
initialize_session_state()
if not st.session_state.shipped_loaded and not st.session_state.manifests:
    load_shipped_manifests()

# ============================================================================
# Main Application Layout
# ============================================================================

render_header()

col1, col2 = st.columns([1, 1])
with col1:
    render_manifest_panel()
with col2:
    render_simulation_panel()

# Sidebar (Settings and Export)
with st.sidebar:
    render_settings_sidebar()
    render_export_section()

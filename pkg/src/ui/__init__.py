"""
UI Package

Streamlit panels for manifests and simulations, the settings and export
sidebar, and the dashboard theme.
"""

"""
Theme Module

Custom CSS applying the blue accent to buttons, tags and metrics, and a
monospace face to trace tables.
"""

import streamlit as st

ACCENT = "#0066CC"
ACCENT_HOVER = "#0052A3"


def inject_theme(accent: str = ACCENT, accent_hover: str = ACCENT_HOVER):
    """
    Inject the dashboard CSS.

    Args:
        accent: Primary color
        accent_hover: Primary color on hover
    """
    st.markdown(
        f"""
        <style>
        :root {{
            --primary-color: {accent} !important;
        }}

        .stButton > button[kind="primary"],
        .stDownloadButton > button[kind="primary"],
        button[kind="primary"] {{
            background-color: {accent} !important;
            color: white !important;
            border-color: {accent} !important;
        }}

        .stButton > button[kind="primary"]:hover,
        .stDownloadButton > button[kind="primary"]:hover,
        button[kind="primary"]:hover {{
            background-color: {accent_hover} !important;
            border-color: {accent_hover} !important;
        }}

        /* build names in multiselects */
        .stMultiSelect [data-baseweb="tag"],
        [data-baseweb="tag"] {{
            background-color: {accent} !important;
            color: white !important;
        }}
        [data-baseweb="tag"] span {{
            color: white !important;
        }}

        [data-testid="stMetricValue"] {{
            color: {accent};
        }}

        [data-testid="stDataFrame"] {{
            font-family: "SFMono-Regular", Consolas, "Liberation Mono", monospace;
        }}
        </style>
        """,
        unsafe_allow_html=True
    )

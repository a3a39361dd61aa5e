"""
Header Component Module

Renders the application header with title and a short description.
"""

import streamlit as st


def render_header(title: str = "Aspect IoT Cohesion Lab"):
    """
    Render the application header.

    Args:
        title: Page heading
    """
    st.markdown(
        f"""
        <div style="display: flex; align-items: center; height: 100%;">
            <h1 style="margin: 0; padding: 0; vertical-align: middle;">{title}</h1>
        </div>
        """,
        unsafe_allow_html=True
    )
    st.caption(
        "Compare the tangled and woven builds of the IoT middleware: "
        "cohesion of their concern manifests and equivalence of their traces."
    )
    st.divider()

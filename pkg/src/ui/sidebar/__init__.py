"""
Sidebar Package

Protocol and report settings, plus report and trace downloads.
"""

from .settings_sidebar import render_settings_sidebar
from .export_section import render_export_section

__all__ = ['render_settings_sidebar', 'render_export_section']

"""
UI Components Package

Header, manifest panel (reports, comparison, breakdown) and simulation panel.
"""

from .header import render_header
from .manifest_panel import render_manifest_panel
from .simulation_panel import render_simulation_panel, trace_frame

__all__ = ['render_header', 'render_manifest_panel', 'render_simulation_panel', 'trace_frame']

"""
Styles Package

Dashboard CSS (accent colors, monospace trace tables).
"""

from .theme import ACCENT, inject_theme

__all__ = ['ACCENT', 'inject_theme']

"""
State Package

Session state of the dashboard: loaded manifests, simulation results, export cache.
"""

from .session_manager import (
    initialize_session_state,
    reset_all_state,
    reset_export_state,
    reset_manifest_state,
    reset_simulation_state
)

__all__ = [
    'initialize_session_state',
    'reset_all_state',
    'reset_export_state',
    'reset_manifest_state',
    'reset_simulation_state'
]

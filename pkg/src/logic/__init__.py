"""
Logic Package

Contains the manifest and pointcut parsers, cohesion metrics, the weaving
runtime, the simulated middleware and the experiment pipeline.
"""

from .exporter import ExcelExporter
from .manifest_parser import load_manifest, parse_manifest, write_manifest
from .metrics import build_report
from .pointcut_parser import parse_pointcut
from .weaver import OperationRegistry, emit_manifest, weave

__all__ = ['ExcelExporter', 'load_manifest', 'parse_manifest', 'write_manifest', 'build_report', 'parse_pointcut',
           'OperationRegistry', 'emit_manifest', 'weave']

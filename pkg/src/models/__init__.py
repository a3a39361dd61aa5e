"""
Models Package

Contains data structures for manifests, reports, pointcuts, aspects, the
middleware protocol, scenarios and traces.
"""

from .aop import Advice, AdvicePhase, Aspect, BuildMode, WeaveReport
from .manifest import ConcernManifest, ConcernTag, ModuleDecl, ModuleKind
from .report import CohesionReport, ModuleCohesion, ReportSettings
from .settings import CacheConfig, SimulationSettings

__all__ = ['Advice', 'AdvicePhase', 'Aspect', 'BuildMode', 'WeaveReport', 'ConcernManifest', 'ConcernTag',
           'ModuleDecl', 'ModuleKind', 'CohesionReport', 'ModuleCohesion', 'ReportSettings', 'CacheConfig',
           'SimulationSettings']

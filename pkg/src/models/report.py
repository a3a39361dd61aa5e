"""
Cohesion Report Models

Data structures holding computed cohesion indices for one build version.
"""

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class CohesionReport:
    """
    Cohesion indices of one version, unrounded.

    Attributes:
        version_label: Label of the measured version
        coi_classes: CoI(J), mean of 1/f over class modules; None without classes
        coi_aspects: CoI(AJ), mean of 1/f over aspect modules; None without aspects
        combined: Mean of the present indices
    """
    version_label: str
    coi_classes: Optional[float]
    coi_aspects: Optional[float]
    combined: float


@dataclass(frozen=True)
class ModuleCohesion:
    """
    Cohesion contribution of a single module.

    Attributes:
        name: Module name
        kind: "class" or "aspect"
        functionality_count: f(module)
        cohesion: 1 / f(module)
    """
    name: str
    kind: str
    functionality_count: int
    cohesion: float


@dataclass
class ReportSettings:
    """
    Display settings for cohesion reports.

    Attributes:
        decimals: Display precision; rounding is half away from zero
        tangled_label: Version label of the tangled (object-oriented) build
        woven_label: Version label of the woven (aspect-oriented) build
    """
    decimals: int = 2
    tangled_label: str = "iot-java"
    woven_label: str = "iot-aspectj"

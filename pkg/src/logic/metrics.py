"""
Cohesion Metrics Module

Computes the Cohesion Index of the class modules, CoI(J), and of the aspect
modules, CoI(AJ), of a concern manifest, plus their combined average.

    CoI = (sum over modules of 1 / f(module)) / (number of modules)

Values are kept at full precision; rounding happens only for display.
"""

from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, Iterable, List, Optional

from ..errors import ReportError
from ..models.manifest import ConcernManifest, ModuleDecl, functionality_count
from ..models.report import CohesionReport, ModuleCohesion
from ..utils.logging_utils import get_logger

logger = get_logger(__name__)


def _reciprocal_mean(modules: Iterable[ModuleDecl]) -> Optional[float]:
    """
    Mean of 1/f over the given modules.

    Args:
        modules: Module declarations (f >= 1 guaranteed by the manifest model)

    Returns:
        The mean, or None when there are no modules
    """
    counts = [functionality_count(decl) for decl in modules]
    if not counts:
        return None
    return sum(1.0 / f for f in counts) / len(counts)


def coi_classes(manifest: ConcernManifest) -> Optional[float]:
    """
    Cohesion Index of the class modules, CoI(J).

    Args:
        manifest: Valid concern manifest

    Returns:
        Mean of 1/f(i) over class modules, or None when the manifest has none
    """
    return _reciprocal_mean(manifest.class_modules)


def coi_aspects(manifest: ConcernManifest) -> Optional[float]:
    """
    Cohesion Index of the aspect modules, CoI(AJ).

    Args:
        manifest: Valid concern manifest

    Returns:
        Mean of 1/f(k) over aspect modules, or None when r = 0
    """
    return _reciprocal_mean(manifest.aspect_modules)


def combined_average(classes: Optional[float], aspects: Optional[float]) -> float:
    """
    Arithmetic mean of the present (unrounded) indices.

    Args:
        classes: CoI(J) or None
        aspects: CoI(AJ) or None

    Returns:
        Mean of the indices that are present

    Raises:
        ReportError: when both indices are absent
    """
    present = [value for value in (classes, aspects) if value is not None]
    if not present:
        raise ReportError("cannot average: both cohesion indices are absent")
    return sum(present) / len(present)


def build_report(manifest: ConcernManifest) -> CohesionReport:
    """
    Compute the full cohesion report of one manifest.

    Args:
        manifest: Valid concern manifest

    Returns:
        CohesionReport with unrounded values
    """
    classes = coi_classes(manifest)
    aspects = coi_aspects(manifest)
    report = CohesionReport(
        version_label=manifest.version_label,
        coi_classes=classes,
        coi_aspects=aspects,
        combined=combined_average(classes, aspects),
    )
    logger.debug(
        "cohesion of %s: classes=%s aspects=%s combined=%s",
        report.version_label, classes, aspects, report.combined,
    )
    return report


def module_breakdown(manifest: ConcernManifest) -> List[ModuleCohesion]:
    """
    Per-module functionality counts and reciprocal cohesion values.

    Args:
        manifest: Valid concern manifest

    Returns:
        One ModuleCohesion per declaration, in manifest order
    """
    rows = []
    for decl in manifest.modules:
        f = functionality_count(decl)
        rows.append(ModuleCohesion(
            name=decl.name,
            kind=decl.kind.value,
            functionality_count=f,
            cohesion=1.0 / f,
        ))
    return rows


def concern_spread(manifest: ConcernManifest) -> Dict[str, List[str]]:
    """
    Map every concern tag to the modules declaring it.

    A tag declared by more than one module is scattered across them.

    Args:
        manifest: Valid concern manifest

    Returns:
        Dictionary tag -> module names, tags in first-appearance order
    """
    spread: Dict[str, List[str]] = {}
    for decl in manifest.modules:
        for tag in decl.tag_names:
            spread.setdefault(tag, []).append(decl.name)
    return spread


def round_display(value: float, decimals: int = 2) -> Decimal:
    """
    Round half away from zero for display.

    Args:
        value: Unrounded value
        decimals: Number of decimal places

    Returns:
        Rounded Decimal (0.375 -> 0.38, 0.6875 -> 0.69)
    """
    quantum = Decimal(1).scaleb(-decimals)
    return Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP)


def format_index(value: Optional[float], decimals: int = 2) -> Optional[str]:
    """
    Format an index with fixed decimals, keeping absence as None.

    Args:
        value: Index value or None
        decimals: Number of decimal places

    Returns:
        Fixed-point string such as "0.19", or None
    """
    if value is None:
        return None
    return f"{round_display(value, decimals):.{decimals}f}"


def display_delta(left: Optional[float], right: Optional[float], decimals: int = 2) -> str:
    """
    Difference right - left of two indices taken at display precision.

    Args:
        left: Index of the left-hand version
        right: Index of the right-hand version
        decimals: Display precision

    Returns:
        "+0.19" style string, "0.00" when equal, "-" when either side is absent
    """
    if left is None or right is None:
        return "-"
    delta = round_display(right, decimals) - round_display(left, decimals)
    text = f"{delta:.{decimals}f}"
    if delta > 0:
        return f"+{text}"
    if delta == 0:
        return f"{Decimal(0):.{decimals}f}"
    return text

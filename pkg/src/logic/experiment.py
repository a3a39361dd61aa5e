"""
Experiment Module

The end-to-end measurement: build the middleware in both modes, check the
emitted manifests against the shipped golden manifests, run the reference
scenario in both modes and check the traces agree, then compute the
cohesion comparison.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

from ..errors import VerificationError
from ..models.aop import BuildMode
from ..models.manifest import ConcernManifest
from ..models.report import CohesionReport, ReportSettings
from ..utils.logging_utils import get_logger
from .manifest_parser import MANIFEST_EXTENSION, save_manifest, write_manifest
from .metrics import build_report
from .middleware import Middleware
from .report_renderer import render_report, render_summary_line
from .scenario_parser import parse_scenario
from .scenario_runner import SimulationResult, first_divergence, run_scenario, write_trace
from .transport import SimWorld

logger = get_logger(__name__)

PROJECT_ROOT = Path(__file__).resolve().parents[2]
GOLDEN_MANIFEST_DIR = PROJECT_ROOT / "manifests"

DEMO_SEED = 42

DEMO_SCENARIO = """\
# Reference scenario: a sensor and a gateway establish a session, the
# sensor pushes readings, the gateway reads them (second read is cached,
# a write in between invalidates the entry).
devices sensor gateway
link delay=1 drop=0 seed=42
key 0x5EED

at 0 sensor put temp "23.5"
at 0 sensor put humidity "41"
at 1 gateway handshake sensor
at 10 sensor send gateway temp "23.5"
at 12 gateway read sensor temp
at 13 gateway read sensor temp
at 14 sensor put temp "23.7"
at 15 gateway read sensor temp
at 16 gateway read sensor pressure
at 20 sensor send gateway batch "t=23.5;h=41;p=1013|t=23.5;h=41;p=1013|t=23.5;h=41;p=1013|t=23.5;h=41;p=1013|t=23.5;h=41;p=1013|t=23.5;h=41;p=1013|t=23.5;h=41;p=1013|t=23.5;h=41;p=1013|t=23.5;h=41;p=1013|t=23.5;h=41;p=1013|t=23.5;h=41;p=1013|t=23.5;h=41;p=1013|t=23.5;h=41;p=1013|t=23.5;h=41;p=1013|t=23.5;h=41;p=1013|t=23.5;h=41;p=1013|"
run 200
"""

OUTPUT_FILES = ("iot-java.cm", "iot-aspectj.cm", "trace-tangled.jsonl", "trace-woven.jsonl", "report.csv")


@dataclass
class DemoOutcome:
    """
    Everything the demo produced.

    Attributes:
        manifests: Emitted manifests by mode
        reports: Tangled then woven cohesion report
        runs: Scenario runs by mode
        checks: Names of the verifications that passed, in order
        written: Files written to the output directory
    """
    manifests: Dict[BuildMode, ConcernManifest]
    reports: List[CohesionReport]
    runs: Dict[BuildMode, SimulationResult]
    checks: List[str] = field(default_factory=list)
    written: List[Path] = field(default_factory=list)

    def summary_lines(self, decimals: int = 2) -> List[str]:
        return [render_summary_line(report, decimals) for report in self.reports]


def build_manifest(mode: BuildMode, version_label: Optional[str] = None) -> ConcernManifest:
    """Build the reference middleware in a mode and emit its concern manifest."""
    return Middleware(SimWorld(), mode).manifest(version_label)


def verify_golden_manifest(manifest: ConcernManifest, golden_dir: Union[str, Path]) -> Path:
    """
    Check an emitted manifest is byte-identical to its golden file.

    Raises:
        VerificationError: naming the file and the first differing line
    """
    path = Path(golden_dir) / f"{manifest.version_label}{MANIFEST_EXTENSION}"
    check = f"golden manifest {path.name}"
    try:
        expected = path.read_bytes().decode("utf-8")
    except OSError as exc:
        raise VerificationError(check, f"cannot read {path}: {exc}") from exc

    emitted = write_manifest(manifest)
    if emitted == expected:
        return path
    expected_lines, emitted_lines = expected.split("\n"), emitted.split("\n")
    for line_no, (want, got) in enumerate(zip(expected_lines, emitted_lines), 1):
        if want != got:
            raise VerificationError(check, f"line {line_no}: expected {want!r}, emitted {got!r}")
    raise VerificationError(check, f"expected {len(expected_lines)} lines, emitted {len(emitted_lines)}")


def _verify(outcome: DemoOutcome, check: str, condition: bool, message: str):
    if not condition:
        raise VerificationError(check, message)
    outcome.checks.append(check)


def run_demo(golden_dir: Union[str, Path, None] = None, out_dir: Union[str, Path, None] = None,
             settings: Optional[ReportSettings] = None) -> DemoOutcome:
    """
    Run the whole measurement.

    Args:
        golden_dir: Directory with the golden manifests (default: shipped manifests/)
        out_dir: Directory receiving manifests, traces and report.csv
        settings: Display settings and version labels

    Returns:
        DemoOutcome when every verification passed

    Raises:
        VerificationError: naming the first failing verification
    """
    settings = settings or ReportSettings()
    golden_dir = Path(golden_dir) if golden_dir is not None else GOLDEN_MANIFEST_DIR

    manifests = {
        BuildMode.TANGLED: build_manifest(BuildMode.TANGLED, settings.tangled_label),
        BuildMode.WOVEN: build_manifest(BuildMode.WOVEN, settings.woven_label),
    }
    outcome = DemoOutcome(manifests=manifests, reports=[], runs={})
    for manifest in manifests.values():
        verify_golden_manifest(manifest, golden_dir)
        outcome.checks.append(f"golden manifest {manifest.version_label}")

    scenario = parse_scenario(DEMO_SCENARIO).with_seed(DEMO_SEED)
    for mode in (BuildMode.TANGLED, BuildMode.WOVEN):
        outcome.runs[mode] = run_scenario(scenario, mode)
    tangled_trace = outcome.runs[BuildMode.TANGLED].trace
    woven_trace = outcome.runs[BuildMode.WOVEN].trace
    divergence = first_divergence(tangled_trace, woven_trace)
    _verify(outcome, "trace equivalence", divergence is None,
            f"tangled and woven traces differ at event {divergence}")
    kinds = {event.kind for event in woven_trace}
    _verify(outcome, "scenario outcome", {"session_established", "delivered"} <= kinds,
            "demo trace lacks session_established or delivered")

    outcome.reports = [build_report(manifests[BuildMode.TANGLED]), build_report(manifests[BuildMode.WOVEN])]
    tangled_report, woven_report = outcome.reports
    _verify(outcome, "class cohesion improves",
            woven_report.coi_classes is not None and tangled_report.coi_classes is not None
            and woven_report.coi_classes > tangled_report.coi_classes,
            "woven CoI(J) is not above tangled CoI(J)")
    _verify(outcome, "aspect cohesion", woven_report.coi_aspects == 1.0,
            f"woven CoI(AJ) is {woven_report.coi_aspects}, expected 1.0")

    if out_dir is not None:
        outcome.written = write_outputs(outcome, out_dir, settings.decimals)
    for line in outcome.summary_lines(settings.decimals):
        logger.info(line)
    return outcome


def write_outputs(outcome: DemoOutcome, out_dir: Union[str, Path], decimals: int = 2) -> List[Path]:
    """Write both manifests, both traces and report.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [save_manifest(manifest, out_dir / f"{manifest.version_label}{MANIFEST_EXTENSION}")
               for manifest in outcome.manifests.values()]
    for mode, result in outcome.runs.items():
        path = out_dir / f"trace-{mode.value}.jsonl"
        write_trace(result.trace, path)
        written.append(path)
    report_path = out_dir / "report.csv"
    report_path.write_text(render_report(outcome.reports, "csv", decimals), encoding="utf-8")
    written.append(report_path)
    return written

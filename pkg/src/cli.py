"""
Command-line entry point.

    python -m src.cli simulate --mode woven --scenario scenarios/demo.scn
    python -m src.cli metrics --manifest manifests/iot-java.cm
    python -m src.cli compare --left manifests/iot-java.cm --right manifests/iot-aspectj.cm
    python -m src.cli demo --out build/

Exit codes: 0 success, 1 usage, 2 input parse error, 3 verification or
internal failure.
"""

import argparse
import sys
from typing import List, NoReturn, Optional

from .errors import (
    AspectIoTError,
    ManifestError,
    PointcutSyntaxError,
    ReportError,
    ScenarioError,
    UsageError,
    VerificationError,
)
from .logic.exporter import export_reports_xlsx
from .logic.experiment import run_demo
from .logic.manifest_parser import load_manifest
from .logic.metrics import build_report, concern_spread, module_breakdown
from .logic.report_renderer import REPORT_FORMATS, render_breakdown, render_comparison, render_report
from .logic.scenario_parser import load_scenario
from .logic.scenario_runner import render_trace, run_scenario, write_trace
from .models.aop import BuildMode
from .models.report import ReportSettings
from .utils.logging_utils import configure_logging, get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_FAILURE = 3


class CliArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code instead of argparse's 2."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = CliArgumentParser(
        prog="aspect-iot",
        description="Tangled and woven IoT middleware builds with cohesion measurement",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="Increase log verbosity (-v info, -vv debug)")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=CliArgumentParser)
    commands.required = True

    simulate = commands.add_parser("simulate", help="Run a scenario against one build")
    simulate.add_argument("--mode", required=True, choices=[mode.value for mode in BuildMode])
    simulate.add_argument("--scenario", required=True, help="Scenario file (.scn)")
    simulate.add_argument("--trace", help="Write the JSONL trace here instead of stdout")
    simulate.add_argument("--seed", type=int, help="Override the scenario's link seed")
    simulate.set_defaults(handler=cmd_simulate)

    metrics = commands.add_parser("metrics", help="Cohesion report of one manifest")
    metrics.add_argument("--manifest", required=True, help="Concern manifest (.cm)")
    metrics.add_argument("--format", default="table", choices=REPORT_FORMATS)
    metrics.add_argument("--breakdown", action="store_true", help="Also print per-module cohesion")
    metrics.add_argument("--xlsx", help="Also export the report to this Excel workbook")
    metrics.set_defaults(handler=cmd_metrics)

    compare = commands.add_parser("compare", help="Compare two manifests")
    compare.add_argument("--left", required=True, help="Baseline manifest")
    compare.add_argument("--right", required=True, help="Compared manifest")
    compare.add_argument("--format", default="table", choices=REPORT_FORMATS)
    compare.set_defaults(handler=cmd_compare)

    demo = commands.add_parser("demo", help="Run the full tangled vs woven measurement")
    demo.add_argument("--out", help="Directory for manifests, traces and report.csv")
    demo.add_argument("--manifests", help="Directory with the golden manifests")
    demo.set_defaults(handler=cmd_demo)
    return parser


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    result = run_scenario(scenario, BuildMode(args.mode))
    if args.trace:
        write_trace(result.trace, args.trace)
    else:
        sys.stdout.write(render_trace(result.trace))
    print(result.summary(), file=sys.stderr)
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    report = build_report(manifest)
    decimals = ReportSettings().decimals
    sys.stdout.write(render_report([report], args.format, decimals))
    if args.breakdown:
        sys.stdout.write(render_breakdown(module_breakdown(manifest), concern_spread(manifest), decimals))
    if args.xlsx:
        if not export_reports_xlsx([report], args.xlsx, {report.version_label: module_breakdown(manifest)}):
            raise ReportError(f"could not write workbook {args.xlsx}")
        print(f"wrote {args.xlsx}", file=sys.stderr)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    left = build_report(load_manifest(args.left))
    right = build_report(load_manifest(args.right))
    sys.stdout.write(render_comparison(left, right, args.format, ReportSettings().decimals))
    return EXIT_OK


def cmd_demo(args: argparse.Namespace) -> int:
    settings = ReportSettings()
    outcome = run_demo(golden_dir=args.manifests, out_dir=args.out, settings=settings)
    for check in outcome.checks:
        print(f"ok: {check}", file=sys.stderr)
    sys.stdout.write(render_report(outcome.reports, "table", settings.decimals))
    for line in outcome.summary_lines(settings.decimals):
        print(line)
    for path in outcome.written:
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run the command and map errors to exit codes.

    Returns:
        Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    configure_logging(args.verbose)

    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ManifestError, ScenarioError, PointcutSyntaxError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except AspectIoTError as exc:
        logger.debug("command failed", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

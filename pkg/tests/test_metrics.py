import json
import math
import random
from fractions import Fraction

import pytest
from openpyxl import load_workbook

from src.errors import ReportError, UsageError
from src.logic.exporter import export_reports_xlsx
from src.logic.manifest_parser import load_manifest, parse_manifest
from src.logic.metrics import (
    build_report,
    coi_aspects,
    coi_classes,
    combined_average,
    concern_spread,
    display_delta,
    format_index,
    module_breakdown,
    round_display,
)
from src.logic.report_renderer import render_breakdown, render_comparison, render_report, render_summary_line
from src.models.manifest import ConcernManifest, ModuleDecl, ModuleKind


@pytest.fixture
def reference_reports(manifest_dir):
    return [build_report(load_manifest(manifest_dir / "iot-java.cm")),
            build_report(load_manifest(manifest_dir / "iot-aspectj.cm"))]


def test_single_class_worked_examples():
    assert format_index(coi_classes(parse_manifest("class A: x, y\n"))) == "0.50"
    assert format_index(coi_classes(parse_manifest("class A: x, y, z\n"))) == "0.33"


def test_absent_indices():
    classes_only = parse_manifest("class A: x\n")
    aspects_only = parse_manifest("aspect A: x\n")
    assert coi_aspects(classes_only) is None
    assert coi_classes(aspects_only) is None
    assert build_report(aspects_only).combined == 1.0
    with pytest.raises(ReportError):
        combined_average(None, None)


def test_reference_values(reference_reports):
    tangled, woven = reference_reports
    assert tangled.coi_classes == pytest.approx((1 / 5 + 1 / 6 + 1 / 5 + 1 / 5) / 4)
    assert tangled.coi_aspects is None
    assert woven.coi_classes == pytest.approx(0.375)
    assert woven.coi_aspects == 1.0
    assert woven.combined == pytest.approx(0.6875)


def test_rounding_is_half_up():
    assert str(round_display(0.375)) == "0.38"
    assert str(round_display(0.6875)) == "0.69"
    assert str(round_display(0.125)) == "0.13"
    assert format_index(1.0) == "1.00"
    assert format_index(None) is None


def test_display_delta():
    assert display_delta(0.19166, 0.375) == "+0.19"
    assert display_delta(0.5, 0.5) == "0.00"
    assert display_delta(0.5, 0.25) == "-0.25"
    assert display_delta(None, 0.5) == "-"


def _random_manifest(rng: random.Random) -> ConcernManifest:
    modules = []
    for index in range(rng.randint(1, 20)):
        kind = rng.choice([ModuleKind.CLASS, ModuleKind.ASPECT])
        modules.append(ModuleDecl.of(kind, f"M{index}", *[f"t{n}" for n in range(rng.randint(1, 10))]))
    return ConcernManifest("random", tuple(modules))


def test_random_manifests_match_exact_fractions():
    rng = random.Random(2024)
    for _ in range(1000):
        manifest = _random_manifest(rng)
        modules = manifest.modules

        classes = [Fraction(1, len(d.tags)) for d in modules if d.kind is ModuleKind.CLASS]
        aspects = [Fraction(1, len(d.tags)) for d in modules if d.kind is ModuleKind.ASPECT]
        expected_classes = sum(classes) / len(classes) if classes else None
        expected_aspects = sum(aspects) / len(aspects) if aspects else None
        present = [v for v in (expected_classes, expected_aspects) if v is not None]

        report = build_report(manifest)
        for actual, expected in ((report.coi_classes, expected_classes), (report.coi_aspects, expected_aspects)):
            if expected is None:
                assert actual is None
            else:
                assert math.isclose(actual, float(expected), rel_tol=1e-12)
                assert 0.0 < actual <= 1.0
        assert math.isclose(report.combined, float(sum(present) / len(present)), rel_tol=1e-12)


def test_adding_a_tag_never_raises_cohesion():
    rng = random.Random(11)
    for _ in range(300):
        manifest = _random_manifest(rng)
        index = rng.randrange(len(manifest.modules))
        target = manifest.modules[index]
        grown = ModuleDecl.of(target.kind, target.name, *target.tag_names, "extra")
        widened = ConcernManifest(manifest.version_label,
                                  manifest.modules[:index] + (grown,) + manifest.modules[index + 1:])

        assert module_breakdown(widened)[index].cohesion < module_breakdown(manifest)[index].cohesion
        before, after = build_report(manifest), build_report(widened)
        if target.kind is ModuleKind.CLASS:
            assert after.coi_classes < before.coi_classes
            assert after.coi_aspects == before.coi_aspects
        else:
            assert after.coi_aspects < before.coi_aspects
            assert after.coi_classes == before.coi_classes


def test_aspect_cohesion_is_one_exactly_when_every_aspect_is_pure():
    rng = random.Random(5)
    for _ in range(500):
        manifest = _random_manifest(rng)
        aspects = [d for d in manifest.modules if d.kind is ModuleKind.ASPECT]
        if not aspects:
            assert coi_aspects(manifest) is None
            continue
        pure = all(len(d.tags) == 1 for d in aspects)
        assert (coi_aspects(manifest) == 1.0) == pure


def test_table_report(reference_reports):
    lines = render_report(reference_reports, "table").splitlines()
    assert lines[0].split() == ["version", "CoI(J)", "CoI(AJ)", "Average"]
    assert lines[1].split() == ["iot-java", "0.19", "-", "0.19"]
    assert lines[2].split() == ["iot-aspectj", "0.38", "1.00", "0.69"]


def test_csv_report(reference_reports):
    assert render_report(reference_reports, "csv") == (
        "version,coi_classes,coi_aspects,average\n"
        "iot-java,0.19,,0.19\n"
        "iot-aspectj,0.38,1.00,0.69\n"
    )


def test_json_report(reference_reports):
    document = json.loads(render_report(reference_reports, "json"))
    assert document == [
        {"version": "iot-java", "coi_classes": 0.19, "coi_aspects": None, "average": 0.19},
        {"version": "iot-aspectj", "coi_classes": 0.38, "coi_aspects": 1.0, "average": 0.69},
    ]


def test_render_errors(reference_reports):
    with pytest.raises(UsageError):
        render_report(reference_reports, "xml")
    with pytest.raises(ReportError):
        render_report([], "table")


def test_summary_and_comparison(reference_reports):
    tangled, woven = reference_reports
    assert render_summary_line(tangled) == "iot-java: CoI(J)=0.19, CoI(AJ)=-, avg=0.19"
    assert render_comparison(tangled, woven).endswith("delta CoI(J): +0.19\n")
    assert render_comparison(tangled, tangled).endswith("delta CoI(J): 0.00\n")
    document = json.loads(render_comparison(tangled, woven, "json"))
    assert document["delta_coi_classes"] == "+0.19"


def test_breakdown_lists_scattered_concerns(manifest_dir):
    manifest = load_manifest(manifest_dir / "iot-java.cm")
    rows = module_breakdown(manifest)
    assert [(r.name, r.functionality_count) for r in rows] == [
        ("Handshaking", 5), ("DataTransfer", 6), ("Security", 5), ("SessionRegistry", 5)]
    spread = concern_spread(manifest)
    assert spread["caching"] == ["Handshaking", "DataTransfer"]
    text = render_breakdown(rows, spread)
    assert "scattered concerns:" in text
    assert "  synchronization: Handshaking, DataTransfer, Security, SessionRegistry" in text


def test_woven_manifest_has_no_scattered_concerns(manifest_dir):
    spread = concern_spread(load_manifest(manifest_dir / "iot-aspectj.cm"))
    assert all(len(modules) == 1 for modules in spread.values())


def test_excel_export(tmp_path, manifest_dir, reference_reports):
    breakdowns = {"iot-java": module_breakdown(load_manifest(manifest_dir / "iot-java.cm"))}
    path = tmp_path / "report.xlsx"
    assert export_reports_xlsx(reference_reports, str(path), breakdowns)

    workbook = load_workbook(path)
    assert workbook.sheetnames == ["Cohesion", "Modules"]
    cohesion = workbook["Cohesion"]
    assert [c.value for c in cohesion[1]] == ["Version", "CoI(J)", "CoI(AJ)", "Average"]
    assert [c.value for c in cohesion[2]] == ["iot-java", 0.19, "-", 0.19]
    assert [c.value for c in cohesion[3]] == ["iot-aspectj", 0.38, 1.0, 0.69]
    assert workbook["Modules"].max_row == 5

import random

import pytest

from src.errors import ManifestError, ManifestSyntaxError
from src.logic.manifest_parser import load_manifest, parse_manifest, save_manifest, write_manifest
from src.models.manifest import ConcernManifest, ModuleDecl, ModuleKind


def test_parses_declarations_in_file_order():
    manifest = parse_manifest(
        "version demo\n"
        "# comment\n"
        "\n"
        "class Handshaking: handshake_core, logging\n"
        "aspect LoggingAspect:logging\n"
    )
    assert manifest.version_label == "demo"
    assert [d.name for d in manifest.modules] == ["Handshaking", "LoggingAspect"]
    assert manifest.modules[0].tag_names == ["handshake_core", "logging"]
    assert manifest.modules[1].kind is ModuleKind.ASPECT
    assert manifest.class_count == 1
    assert manifest.aspect_count == 1


def test_default_label_used_without_version_line():
    manifest = parse_manifest("class A: x\n", default_label="fallback")
    assert manifest.version_label == "fallback"


def test_crlf_line_endings_are_accepted():
    manifest = parse_manifest("class A: x, y\r\nclass B: z\r\n")
    assert [d.tag_names for d in manifest.modules] == [["x", "y"], ["z"]]


@pytest.mark.parametrize("text, line, column", [
    ("class A: x\nclass B y\n", 2, 9),
    ("class A: x, x\n", 1, 13),
    ("class A:\n", 1, 9),
    ("klass A: x\n", 1, 1),
    ("class A: x,\n", 1, 12),
    ("class A: x\nclass A: y\n", 2, 7),
    ("class A: x\nversion late\n", 2, 1),
])
def test_syntax_errors_report_line_and_column(text, line, column):
    with pytest.raises(ManifestSyntaxError) as excinfo:
        parse_manifest(text)
    assert excinfo.value.line == line
    assert excinfo.value.column == column


def test_manifest_without_modules_is_rejected():
    with pytest.raises(ManifestError):
        parse_manifest("# nothing here\n")
    with pytest.raises(ManifestError):
        parse_manifest("version empty\n")


def test_model_rejects_duplicates_and_empty_tags():
    with pytest.raises(ManifestError):
        ModuleDecl.of(ModuleKind.CLASS, "A")
    with pytest.raises(ManifestError):
        ModuleDecl.of(ModuleKind.CLASS, "A", "x", "x")
    decl = ModuleDecl.of(ModuleKind.CLASS, "A", "x")
    with pytest.raises(ManifestError):
        ConcernManifest("v", (decl, decl))


def test_write_is_canonical():
    manifest = parse_manifest("version v\nclass   A :x,y\naspect B: z\n")
    assert write_manifest(manifest) == "version v\nclass A: x, y\naspect B: z\n"


def _random_manifest(rng: random.Random) -> ConcernManifest:
    modules = []
    for index in range(rng.randint(1, 8)):
        kind = rng.choice([ModuleKind.CLASS, ModuleKind.ASPECT])
        tags = rng.sample([f"t{n}" for n in range(12)], rng.randint(1, 6))
        modules.append(ModuleDecl.of(kind, f"M{index}", *tags))
    return ConcernManifest(f"v{rng.randint(0, 99)}", tuple(modules))


def test_write_then_parse_returns_the_same_manifest():
    rng = random.Random(7)
    for _ in range(1000):
        manifest = _random_manifest(rng)
        assert parse_manifest(write_manifest(manifest)) == manifest


def test_save_and_load_use_file_stem_as_label(tmp_path):
    manifest = parse_manifest("class A: x\n")
    path = save_manifest(manifest, tmp_path / "stemmed.cm")
    assert load_manifest(path).version_label == "stemmed"


def test_load_missing_file_is_a_manifest_error(tmp_path):
    with pytest.raises(ManifestError):
        load_manifest(tmp_path / "missing.cm")


def test_shipped_manifests_parse(manifest_dir):
    java = load_manifest(manifest_dir / "iot-java.cm")
    aspectj = load_manifest(manifest_dir / "iot-aspectj.cm")
    assert (java.class_count, java.aspect_count) == (4, 0)
    assert (aspectj.class_count, aspectj.aspect_count) == (4, 3)

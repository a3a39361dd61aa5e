import pytest

from src.errors import VerificationError
from src.logic.experiment import OUTPUT_FILES, build_manifest, run_demo, verify_golden_manifest
from src.models.aop import BuildMode


@pytest.fixture(scope="module")
def outcome():
    return run_demo()


def test_every_check_passes(outcome):
    assert outcome.checks == [
        "golden manifest iot-java",
        "golden manifest iot-aspectj",
        "trace equivalence",
        "scenario outcome",
        "class cohesion improves",
        "aspect cohesion",
    ]
    assert outcome.summary_lines() == [
        "iot-java: CoI(J)=0.19, CoI(AJ)=-, avg=0.19",
        "iot-aspectj: CoI(J)=0.38, CoI(AJ)=1.00, avg=0.69",
    ]
    assert outcome.written == []


def test_demo_handshake_timeline(outcome):
    trace = outcome.runs[BuildMode.WOVEN].trace
    steps = [(e.tick, e.actor, e.kind) for e in trace
             if e.kind in ("hello_sent", "challenge_sent", "confirm_sent", "session_established")]
    assert steps == [
        (1, "gateway", "hello_sent"),
        (2, "sensor", "challenge_sent"),
        (3, "gateway", "confirm_sent"),
        (3, "gateway", "session_established"),
        (4, "sensor", "session_established"),
    ]


def test_demo_deliveries(outcome):
    gateway = outcome.runs[BuildMode.TANGLED].middleware.node("gateway")
    assert [(d.peer, d.sensor_id, len(d.payload)) for d in gateway.deliveries] == [
        ("sensor", "temp", 4), ("sensor", "batch", 304)]
    batch_frames = [e for e in outcome.runs[BuildMode.TANGLED].trace
                    if e.kind == "data" and e.actor == "gateway" and e.tick >= 20]
    assert len(batch_frames) == 2


def test_outputs_are_reproducible(tmp_path):
    first = run_demo(out_dir=tmp_path / "first")
    run_demo(out_dir=tmp_path / "second")
    assert [path.name for path in first.written] == list(OUTPUT_FILES)
    for name in OUTPUT_FILES:
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()
    assert (tmp_path / "first" / "report.csv").read_text(encoding="utf-8") == (
        "version,coi_classes,coi_aspects,average\n"
        "iot-java,0.19,,0.19\n"
        "iot-aspectj,0.38,1.00,0.69\n"
    )


def test_golden_mismatch_names_the_line(tmp_path, manifest_dir):
    (tmp_path / "iot-java.cm").write_text(
        (manifest_dir / "iot-java.cm").read_text(encoding="utf-8").replace("audit, ", ""), encoding="utf-8")
    with pytest.raises(VerificationError) as excinfo:
        verify_golden_manifest(build_manifest(BuildMode.TANGLED), tmp_path)
    assert excinfo.value.check == "golden manifest iot-java.cm"
    assert "line 4" in str(excinfo.value)


def test_missing_golden_manifest(tmp_path):
    with pytest.raises(VerificationError):
        run_demo(golden_dir=tmp_path)

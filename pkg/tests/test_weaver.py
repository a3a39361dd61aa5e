import random

import pytest

from src.errors import AdviceError, ProceedError, RegistryError, WeaveError
from src.logic.experiment import build_manifest
from src.logic.manifest_parser import write_manifest
from src.logic.pointcut_parser import parse_pointcut
from src.logic.weaver import OperationRegistry, emit_manifest, invoke, register_operation, weave
from src.models.aop import Advice, AdvicePhase, Aspect, BuildMode
from src.models.manifest import ConcernTag, ModuleKind
from src.models.pointcut import JoinPoint, matches

EVERYTHING = parse_pointcut("execution(*.*)")


def _aspect(name, precedence, *advice, tag=None, pointcut=EVERYTHING):
    return Aspect(name, ConcernTag(tag or name.lower()), precedence,
                  tuple((pointcut, Advice(phase, body, name)) for phase, body in advice))


@pytest.fixture
def calls():
    return []


@pytest.fixture
def registry(calls):
    registry = OperationRegistry()

    def core(node, value):
        calls.append("core")
        return value * 2

    register_operation(registry, "Service", "run", core, ("service_core",))
    return registry


def _recorder(calls, label):
    def before(invocation):
        calls.append(f"{label}.before")

    def after(invocation, result):
        calls.append(f"{label}.after={result}")

    def around(invocation):
        calls.append(f"{label}.enter")
        result = invocation.proceed()
        calls.append(f"{label}.exit")
        return result

    return before, after, around


def test_chain_order_follows_precedence(registry, calls):
    before, after, around = _recorder(calls, "inner")
    outer_before, _, outer_around = _recorder(calls, "outer")
    weave(registry, [
        _aspect("Inner", 20, (AdvicePhase.BEFORE, before), (AdvicePhase.AFTER, after)),
        _aspect("Outer", 10, (AdvicePhase.AROUND, outer_around)),
    ])
    assert invoke(registry.handle("Service", "run"), None, 21) == 42
    assert calls == ["outer.enter", "inner.before", "core", "inner.after=42", "outer.exit"]


def test_equal_precedence_uses_registration_order(registry, calls):
    first_before, _, _ = _recorder(calls, "first")
    second_before, _, _ = _recorder(calls, "second")
    report = weave(registry, [
        _aspect("First", 5, (AdvicePhase.BEFORE, first_before)),
        _aspect("Second", 5, (AdvicePhase.BEFORE, second_before)),
    ])
    registry.invoke("Service", "run", None, 1)
    assert calls == ["first.before", "second.before", "core"]
    assert report.aspect_names_for("Service", "run") == ["First", "Second"]
    assert [a.rank for a in report.for_operation("Service", "run")] == [0, 1]


def test_unwoven_operation_runs_core_only(registry, calls):
    assert registry.invoke("Service", "run", None, 3) == 6
    assert calls == ["core"]


def test_around_may_skip_proceed(registry, calls):
    weave(registry, [_aspect("Short", 1, (AdvicePhase.AROUND, lambda invocation: "cached"))])
    assert registry.invoke("Service", "run", None, 3) == "cached"
    assert calls == []


def test_proceed_twice_is_an_error(registry):
    def twice(invocation):
        invocation.proceed()
        return invocation.proceed()

    weave(registry, [_aspect("Twice", 1, (AdvicePhase.AROUND, twice))])
    with pytest.raises(ProceedError):
        registry.invoke("Service", "run", None, 1)


def test_proceed_outside_around_is_an_error(registry):
    weave(registry, [_aspect("Eager", 1, (AdvicePhase.BEFORE, lambda invocation: invocation.proceed()))])
    with pytest.raises(ProceedError):
        registry.invoke("Service", "run", None, 1)


def test_advice_failure_is_attributed(registry):
    def broken(invocation):
        raise ValueError("boom")

    weave(registry, [_aspect("Broken", 1, (AdvicePhase.BEFORE, broken))])
    with pytest.raises(AdviceError) as excinfo:
        registry.invoke("Service", "run", None, 1)
    assert excinfo.value.aspect == "Broken"
    assert excinfo.value.phase == "before"
    assert isinstance(excinfo.value.__cause__, ValueError)


def test_core_errors_pass_through_around_unwrapped(calls):
    registry = OperationRegistry()

    def failing(node):
        raise RuntimeError("core failed")

    registry.register_operation("Service", "fail", failing)
    _, _, around = _recorder(calls, "guard")
    weave(registry, [_aspect("Guard", 1, (AdvicePhase.AROUND, around))])
    with pytest.raises(RuntimeError, match="core failed"):
        registry.invoke("Service", "fail", None)
    assert calls == ["guard.enter"]


def test_after_advice_runs_when_core_raises():
    registry = OperationRegistry()
    seen = []
    registry.register_operation("Service", "fail", lambda node: 1 / 0)
    registry.register_operation("Service", "ok", lambda node: "done")

    def audit(invocation, result):
        seen.append((invocation.join_point.op_name, result, type(invocation.error).__name__))

    weave(registry, [_aspect("Audit", 1, (AdvicePhase.AFTER, audit))])
    with pytest.raises(ZeroDivisionError):
        registry.invoke("Service", "fail", None)
    assert registry.invoke("Service", "ok", None) == "done"
    assert seen == [("fail", None, "ZeroDivisionError"), ("ok", "done", "NoneType")]


def test_failing_after_advice_on_a_failed_call_is_attributed():
    registry = OperationRegistry()
    registry.register_operation("Service", "fail", lambda node: 1 / 0)

    def broken(invocation, result):
        raise KeyError("audit")

    weave(registry, [_aspect("Audit", 1, (AdvicePhase.AFTER, broken))])
    with pytest.raises(AdviceError) as excinfo:
        registry.invoke("Service", "fail", None)
    assert excinfo.value.phase == "after"
    assert isinstance(excinfo.value.__context__, ZeroDivisionError)


def test_duplicates_are_rejected(registry):
    with pytest.raises(RegistryError):
        registry.register_operation("Service", "run", lambda node: None)
    with pytest.raises(WeaveError):
        weave(registry, [_aspect("Same", 1), _aspect("Same", 2)])
    with pytest.raises(RegistryError):
        registry.invoke("Service", "missing")


def test_advice_executions_are_recorded(registry, calls):
    before, _, _ = _recorder(calls, "log")
    weave(registry, [_aspect("Log", 1, (AdvicePhase.BEFORE, before))])
    registry.invoke("Service", "run", None, 1)
    registry.invoke("Service", "run", None, 2)
    assert [(e.aspect_name, e.phase) for e in registry.executions] == [("Log", AdvicePhase.BEFORE)] * 2
    assert registry.execution_counts() == [("Log", "before", "Service", "run", 2)]


def test_pointcut_limits_attachment(registry, calls):
    registry.register_operation("Other", "run", lambda node: "other")
    before, _, _ = _recorder(calls, "only")
    report = weave(registry, [_aspect("Only", 1, (AdvicePhase.BEFORE, before),
                                      pointcut=parse_pointcut("execution(Other.*)"))])
    assert report.operations_advised_by("Only") == [("Other", "run")]
    registry.invoke("Service", "run", None, 1)
    assert calls == ["core"]


def test_emit_manifest_moves_concerns_into_aspects(registry):
    registry.register_operation("Other", "run", lambda node: None, ("other_core",))
    aspects = [
        _aspect("Tracing", 1, (AdvicePhase.BEFORE, lambda invocation: None), tag="tracing"),
        _aspect("Pinning", 2, (AdvicePhase.BEFORE, lambda invocation: None), tag="pinning",
                pointcut=parse_pointcut("execution(Service.*)")),
    ]
    tangled = emit_manifest(registry, aspects, BuildMode.TANGLED, "t")
    assert [(d.name, d.tag_names) for d in tangled.modules] == [
        ("Service", ["service_core", "tracing", "pinning"]),
        ("Other", ["other_core", "tracing"]),
    ]
    woven = emit_manifest(registry, aspects, BuildMode.WOVEN, "w")
    assert [(d.name, d.kind, d.tag_names) for d in woven.modules] == [
        ("Service", ModuleKind.CLASS, ["service_core"]),
        ("Other", ModuleKind.CLASS, ["other_core"]),
        ("Tracing", ModuleKind.ASPECT, ["tracing"]),
        ("Pinning", ModuleKind.ASPECT, ["pinning"]),
    ]


@pytest.mark.parametrize("mode, golden", [(BuildMode.TANGLED, "iot-java.cm"), (BuildMode.WOVEN, "iot-aspectj.cm")])
def test_reference_builds_emit_golden_manifests(mode, golden, manifest_dir):
    emitted = write_manifest(build_manifest(mode))
    assert emitted == (manifest_dir / golden).read_bytes().decode("utf-8")


MODULE_NAMES = ["Alpha", "Beta", "Gamma"]
OP_NAMES = ["read", "read_all", "write", "reset"]
GLOBS = ["*", "read*", "*_all", "write", "re*t", "Al*", "*a", "Beta"]


def _random_pointcut(rng, depth=0):
    roll = rng.random()
    if depth >= 2 or roll < 0.5:
        return f"execution({rng.choice(GLOBS)}.{rng.choice(GLOBS)})"
    if roll < 0.65:
        return f"!{_random_pointcut(rng, depth + 1)}"
    operator = rng.choice(["&&", "||"])
    return f"({_random_pointcut(rng, depth + 1)} {operator} {_random_pointcut(rng, depth + 1)})"


def _random_build(rng):
    registry = OperationRegistry()
    for module in MODULE_NAMES:
        for op in rng.sample(OP_NAMES, rng.randint(1, len(OP_NAMES))):
            registry.register_operation(module, op, lambda node: None)
    aspects = []
    for index in range(rng.randint(1, 4)):
        name = f"Aspect{index}"
        advice = tuple(
            (parse_pointcut(_random_pointcut(rng)), Advice(rng.choice(list(AdvicePhase)), lambda *args: None, name))
            for _ in range(rng.randint(1, 3))
        )
        aspects.append(Aspect(name, ConcernTag(f"concern{index}"), rng.choice([10, 20, 30]), advice))
    return registry, aspects


def test_weave_report_agrees_with_pairwise_matching():
    rng = random.Random(2024)
    for _ in range(200):
        registry, aspects = _random_build(rng)
        report = weave(registry, aspects)
        for operation in registry.operations():
            join_point = JoinPoint(operation.handle.module_name, operation.handle.op_name)
            expected = sorted(
                (aspect.precedence, aspect_index, advice_index, aspect.name, advice.phase)
                for aspect_index, aspect in enumerate(aspects)
                for advice_index, (pointcut, advice) in enumerate(aspect.advice_list)
                if matches(pointcut, join_point)
            )
            attached = report.for_operation(*operation.handle.key)
            assert [(a.aspect_name, a.phase) for a in attached] == [(e[3], e[4]) for e in expected]
            assert [a.rank for a in attached] == list(range(len(attached)))


def test_repeated_weaves_are_identical():
    registry, aspects = _random_build(random.Random(7))
    first = weave(registry, aspects).rows()
    for _ in range(100):
        assert weave(registry, aspects).rows() == first
        fresh_registry, fresh_aspects = _random_build(random.Random(7))
        assert weave(fresh_registry, fresh_aspects).rows() == first

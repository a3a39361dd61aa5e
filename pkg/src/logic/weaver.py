"""
Weaver Module

The weaving runtime: an operation registry, static interceptor chains built
from aspects, chain invocation with ``proceed`` continuations, and emission of
the concern manifest that describes a build to the metrics engine.

Chain order per operation is (precedence ascending, aspect registration order,
advice declaration order). Before advice runs outer to inner, Around advice
nests in the same order and After advice runs inner to outer.
After advice also runs when the inner chain raises: it sees the exception as
``Invocation.error`` and the exception is re-raised unchanged.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Deque, Dict, List, Optional, Sequence, Tuple

from ..errors import AdviceError, ProceedError, RegistryError, WeaveError
from ..models.aop import (
    Advice,
    AdviceExecution,
    AdvicePhase,
    Aspect,
    AttachedAdvice,
    BuildMode,
    WeaveReport,
)
from ..models.manifest import ConcernManifest, ModuleDecl, ModuleKind
from ..models.pointcut import JoinPoint
from ..models.report import ReportSettings
from ..utils.logging_utils import get_logger

logger = get_logger(__name__)

CoreBehavior = Callable[..., Any]
OperationKey = Tuple[str, str]

EXECUTION_LOG_LIMIT = 10000


def summarize_args(args: Sequence[Any]) -> str:
    """
    Describe invocation arguments for traces.

    Objects providing ``trace_label()`` describe themselves; byte strings are
    shown by length.

    Args:
        args: Positional invocation arguments

    Returns:
        Space separated summary
    """
    parts = []
    for value in args:
        if hasattr(value, "trace_label"):
            parts.append(value.trace_label())
        elif isinstance(value, (bytes, bytearray)):
            parts.append(f"{len(value)}B")
        else:
            parts.append(str(value))
    return " ".join(parts)


@dataclass(frozen=True)
class OperationHandle:
    """Reference to a registered operation."""
    module_name: str
    op_name: str
    registry: "OperationRegistry" = field(compare=False, repr=False)

    @property
    def key(self) -> OperationKey:
        return (self.module_name, self.op_name)


@dataclass(frozen=True)
class Operation:
    """
    A registered operation.

    Attributes:
        handle: Handle of the operation
        behavior: Core behavior, called with the invocation arguments
        tags: Core concern tags realized by this operation
    """
    handle: OperationHandle
    behavior: CoreBehavior
    tags: Tuple[str, ...] = ()


class Invocation:
    """
    Context handed to advice bodies.

    Attributes:
        join_point: The join point being executed
        args: Positional arguments of the call; by convention args[0] is the acting node
        error: Exception raised by the inner chain (After advice only)
    """

    def __init__(self, join_point: JoinPoint, args: Tuple[Any, ...],
                 proceed: Optional["_Proceed"] = None, error: Optional[Exception] = None):
        self.join_point = join_point
        self.args = args
        self.error = error
        self._proceed = proceed

    @property
    def node(self) -> Any:
        return self.args[0] if self.args else None

    def proceed(self) -> Any:
        """
        Continue with the inner part of the chain (Around advice only).

        Raises:
            ProceedError: outside Around advice, or on a second call
        """
        if self._proceed is None:
            raise ProceedError(f"proceed called outside around advice at {self.join_point.signature}")
        return self._proceed()


class _Proceed:
    """One-shot continuation into the inner suffix of a chain."""

    def __init__(self, continuation: Callable[[], Any], owner: str, join_point: JoinPoint):
        self._continuation = continuation
        self._owner = owner
        self._join_point = join_point
        self.called = False
        self.raised: Optional[BaseException] = None

    def __call__(self) -> Any:
        if self.called:
            raise ProceedError(f"{self._owner} called proceed twice at {self._join_point.signature}")
        self.called = True
        try:
            return self._continuation()
        except BaseException as exc:
            self.raised = exc
            raise


class OperationRegistry:
    """
    Registry of interceptable operations and, after weaving, their chains.

    Registration order is kept for modules and operations; it defines the
    order of manifest declarations.
    """

    def __init__(self):
        self._operations: Dict[OperationKey, Operation] = {}
        self._module_tags: Dict[str, List[str]] = {}
        self._chains: Dict[OperationKey, List[Tuple[AttachedAdvice, Advice]]] = {}
        self.aspects: Tuple[Aspect, ...] = ()
        self.report: Optional[WeaveReport] = None
        self.executions: Deque[AdviceExecution] = deque(maxlen=EXECUTION_LOG_LIMIT)

    def declare_module(self, module_name: str, core_tags: Sequence[str] = ()):
        """
        Declare a module and (some of) its core tags ahead of registration.

        Args:
            module_name: Module name
            core_tags: Core concern tags, appended in order, duplicates ignored
        """
        tags = self._module_tags.setdefault(module_name, [])
        for tag in core_tags:
            if tag not in tags:
                tags.append(tag)

    def register_operation(self, module_name: str, op_name: str, core_behavior: CoreBehavior,
                           tags: Sequence[str] = ()) -> OperationHandle:
        """
        Register an operation so the weaver can discover it.

        Args:
            module_name: Owning module
            op_name: Operation name
            core_behavior: Callable implementing the core behavior
            tags: Core concern tags this operation realizes

        Returns:
            Handle for invocation

        Raises:
            RegistryError: when (module_name, op_name) is already registered
        """
        key = (module_name, op_name)
        if key in self._operations:
            raise RegistryError(f"operation {module_name}.{op_name} already registered")
        JoinPoint(module_name, op_name)  # validates both names
        handle = OperationHandle(module_name, op_name, self)
        self._operations[key] = Operation(handle, core_behavior, tuple(tags))
        self.declare_module(module_name, tags)
        return handle

    def execution_counts(self) -> List[Tuple[str, str, str, str, int]]:
        """(aspect, phase, module, op, count) for the recorded advice executions, in first-seen order."""
        counts: Dict[Tuple[str, str, str, str], int] = {}
        for execution in self.executions:
            key = (execution.aspect_name, execution.phase.value, execution.module_name, execution.op_name)
            counts[key] = counts.get(key, 0) + 1
        return [(*key, count) for key, count in counts.items()]

    def operations(self) -> List[Operation]:
        return list(self._operations.values())

    def operation(self, module_name: str, op_name: str) -> Operation:
        try:
            return self._operations[(module_name, op_name)]
        except KeyError:
            raise RegistryError(f"unknown operation {module_name}.{op_name}") from None

    def handle(self, module_name: str, op_name: str) -> OperationHandle:
        return self.operation(module_name, op_name).handle

    def modules(self) -> List[str]:
        return list(self._module_tags)

    def operations_of(self, module_name: str) -> List[Operation]:
        return [op for (module, _), op in self._operations.items() if module == module_name]

    def core_tags(self, module_name: str) -> List[str]:
        return list(self._module_tags.get(module_name, []))

    def join_point(self, module_name: str, op_name: str, args: Sequence[Any] = ()) -> JoinPoint:
        return JoinPoint(module_name, op_name, args_summary=summarize_args(args))

    def install(self, aspects: Sequence[Aspect], report: WeaveReport,
                chains: Dict[OperationKey, List[Tuple[AttachedAdvice, Advice]]]):
        """Replace the woven chains (called by weave)."""
        self.aspects = tuple(aspects)
        self.report = report
        self._chains = chains

    def invoke(self, module_name: str, op_name: str, *args: Any) -> Any:
        """
        Execute an operation through its chain.

        Args:
            module_name: Owning module
            op_name: Operation name
            *args: Invocation arguments

        Returns:
            Result of the chain
        """
        operation = self.operation(module_name, op_name)
        join_point = self.join_point(module_name, op_name, args)
        chain = self._chains.get(operation.handle.key, [])
        return self._run_chain(operation, chain, join_point, args)

    def _run_chain(self, operation: Operation, chain: List[Tuple[AttachedAdvice, Advice]],
                   join_point: JoinPoint, args: Tuple[Any, ...]) -> Any:
        base = Invocation(join_point, args)

        def step(index: int) -> Any:
            if index == len(chain):
                return operation.behavior(*args)
            attached, advice = chain[index]
            self.executions.append(AdviceExecution(
                attached.aspect_name, advice.phase, join_point.module_name, join_point.op_name
            ))

            if advice.phase is AdvicePhase.BEFORE:
                _call_advice(advice, lambda: advice.body(base))
                return step(index + 1)

            if advice.phase is AdvicePhase.AFTER:
                try:
                    result = step(index + 1)
                except Exception as exc:
                    failed = Invocation(join_point, args, error=exc)
                    _call_advice(advice, lambda: advice.body(failed, None))
                    raise
                _call_advice(advice, lambda: advice.body(base, result))
                return result

            proceed = _Proceed(lambda: step(index + 1), advice.owner, join_point)
            invocation = Invocation(join_point, args, proceed)
            try:
                return advice.body(invocation)
            except Exception as exc:
                if exc is proceed.raised or isinstance(exc, (AdviceError, ProceedError)):
                    raise
                raise AdviceError(advice.owner, advice.phase.value, exc) from exc

        return step(0)


def _call_advice(advice: Advice, call: Callable[[], Any]) -> Any:
    try:
        return call()
    except (AdviceError, ProceedError):
        raise
    except Exception as exc:
        raise AdviceError(advice.owner, advice.phase.value, exc) from exc


def register_operation(registry: OperationRegistry, module_name: str, op_name: str,
                       core_behavior: CoreBehavior, tags: Sequence[str] = ()) -> OperationHandle:
    """Register an operation on a registry (see OperationRegistry.register_operation)."""
    return registry.register_operation(module_name, op_name, core_behavior, tags)


def invoke(handle: OperationHandle, *args: Any) -> Any:
    """
    Execute a registered operation through its woven chain.

    Args:
        handle: Operation handle
        *args: Invocation arguments

    Returns:
        Chain result
    """
    return handle.registry.invoke(handle.module_name, handle.op_name, *args)


def _ordered_advice(aspects: Sequence[Aspect]):
    entries = []
    for aspect_index, aspect in enumerate(aspects):
        for advice_index, (pointcut, advice) in enumerate(aspect.advice_list):
            entries.append((aspect.precedence, aspect_index, advice_index, aspect, pointcut, advice))
    entries.sort(key=lambda entry: entry[:3])
    return entries


def weave(registry: OperationRegistry, aspects: Sequence[Aspect]) -> WeaveReport:
    """
    Attach aspect advice to every operation whose join point it matches.

    Args:
        registry: Registry holding the operations
        aspects: Aspects in registration order

    Returns:
        WeaveReport listing the chain of every registered operation

    Raises:
        WeaveError: on duplicate aspect names
    """
    names = set()
    for aspect in aspects:
        if aspect.name in names:
            raise WeaveError(f"duplicate aspect name {aspect.name!r}")
        names.add(aspect.name)

    entries = _ordered_advice(aspects)
    report = WeaveReport()
    chains: Dict[OperationKey, List[Tuple[AttachedAdvice, Advice]]] = {}
    for operation in registry.operations():
        join_point = JoinPoint(operation.handle.module_name, operation.handle.op_name)
        chain = []
        for precedence, _, _, aspect, pointcut, advice in entries:
            if pointcut.matches(join_point):
                attached = AttachedAdvice(aspect.name, advice.phase, precedence, rank=len(chain))
                chain.append((attached, advice))
        chains[operation.handle.key] = chain
        report.attachments[operation.handle.key] = [attached for attached, _ in chain]

    registry.install(aspects, report, chains)
    logger.debug("wove %d aspects over %d operations", len(aspects), len(chains))
    return report


def _aspect_matches_module(aspect: Aspect, registry: OperationRegistry, module_name: str) -> bool:
    for operation in registry.operations_of(module_name):
        join_point = JoinPoint(module_name, operation.handle.op_name)
        if any(pointcut.matches(join_point) for pointcut, _ in aspect.advice_list):
            return True
    return False


def emit_manifest(registry: OperationRegistry, aspects: Sequence[Aspect], mode: BuildMode,
                  version_label: Optional[str] = None) -> ConcernManifest:
    """
    Describe a build as a concern manifest.

    Woven: every class module declares its core tags and every aspect its one
    concern tag. Tangled: every class module declares its core tags plus the
    concern tag of each aspect whose pointcuts match one of its operations;
    no aspect modules are emitted.

    Args:
        registry: Registry with the core operations
        aspects: The aspects of the build
        mode: BuildMode.TANGLED or BuildMode.WOVEN
        version_label: Label for the manifest; defaults per mode

    Returns:
        ConcernManifest in registration order, aspects by precedence
    """
    settings = ReportSettings()
    if version_label is None:
        version_label = settings.woven_label if mode is BuildMode.WOVEN else settings.tangled_label

    ordered = [entry[1] for entry in sorted(enumerate(aspects), key=lambda e: (e[1].precedence, e[0]))]
    modules: List[ModuleDecl] = []
    for module_name in registry.modules():
        tags = registry.core_tags(module_name)
        if mode is BuildMode.TANGLED:
            for aspect in ordered:
                tag = aspect.concern_tag.name
                if tag not in tags and _aspect_matches_module(aspect, registry, module_name):
                    tags.append(tag)
        modules.append(ModuleDecl.of(ModuleKind.CLASS, module_name, *tags))

    if mode is BuildMode.WOVEN:
        for aspect in ordered:
            modules.append(ModuleDecl(aspect.name, ModuleKind.ASPECT, (aspect.concern_tag,)))

    return ConcernManifest(version_label=version_label, modules=tuple(modules))

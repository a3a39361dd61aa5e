"""
Cross-Cutting Services Module

Synchronization, logging and caching, each implemented once as a service.
The services are exposed two ways:

- as aspects (synchronization_aspect, logging_aspect, caching_aspect) for the
  woven build, attached by pointcut;
- inline in TangledDispatcher for the tangled build, where every operation
  knows which concerns it carries.

Both ways produce the same trace apart from the ``source`` field.
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from ..errors import GuardError
from ..models.aop import Advice, AdvicePhase, Aspect
from ..models.manifest import ConcernTag
from ..models.pointcut import JoinPoint
from ..models.trace import SOURCE_ASPECT, SOURCE_INLINE, GuardEvent, LogRecord
from ..utils.logging_utils import get_logger
from .pointcut_parser import parse_pointcut
from .weaver import Invocation, OperationRegistry, summarize_args

logger = get_logger(__name__)

CORE_MODULES = ("Handshaking", "DataTransfer", "Security", "SessionRegistry")
CACHED_OPERATIONS = frozenset({("DataTransfer", "get_reading"), ("Handshaking", "lookup_capabilities")})

CORE_POINTCUT = " || ".join(f"execution({module}.*)" for module in CORE_MODULES)
CACHING_POINTCUT = "execution(DataTransfer.get_reading) || execution(Handshaking.lookup_capabilities)"

SYNCHRONIZATION_ASPECT = "SynchronizationAspect"
LOGGING_ASPECT = "LoggingAspect"
CACHING_ASPECT = "CachingAspect"

SYNCHRONIZATION_PRECEDENCE = 10
LOGGING_PRECEDENCE = 20
CACHING_PRECEDENCE = 30

CAPABILITIES_KEY = "@capabilities"


class SynchronizationService:
    """
    Guard protocol around operations.

    Each device keeps one stack of held guards; acquiring pushes, releasing
    pops, so depth counts nesting across guards and the same guard may be
    re-acquired by its holder.
    """

    def __init__(self, source: str):
        self.source = source

    def acquire(self, node: Any, guard_name: str, join_point: JoinPoint) -> GuardEvent:
        node.guard_stack.append(guard_name)
        event = GuardEvent(node.world.clock, node.name, guard_name, "acquire", len(node.guard_stack))
        node.world.record(event.to_event(join_point.module_name, join_point.op_name, self.source))
        return event

    def release(self, node: Any, guard_name: str, join_point: JoinPoint) -> GuardEvent:
        if not node.guard_stack or node.guard_stack[-1] != guard_name:
            raise GuardError(f"{node.name} released guard {guard_name} it does not hold")
        node.guard_stack.pop()
        event = GuardEvent(node.world.clock, node.name, guard_name, "release", len(node.guard_stack))
        node.world.record(event.to_event(join_point.module_name, join_point.op_name, self.source))
        return event

    def around(self, node: Any, join_point: JoinPoint, proceed: Callable[[], Any]) -> Any:
        guard_name = join_point.module_name
        self.acquire(node, guard_name, join_point)
        try:
            return proceed()
        finally:
            self.release(node, guard_name, join_point)


class LoggingService:
    """Writes one record before and one after every operation it wraps, including failed ones."""

    def __init__(self, source: str, level: str = "INFO"):
        self.source = source
        self.level = level

    def record(self, node: Any, join_point: JoinPoint, phase: str, message: str,
               level: Optional[str] = None) -> LogRecord:
        record = LogRecord(node.world.clock, level or self.level, join_point.module_name, join_point.op_name,
                           phase, message, self.source)
        node.world.record(record.to_event(node.name))
        logger.debug("[%d] %s %s", record.tick, node.name, message)
        return record

    def before(self, node: Any, join_point: JoinPoint) -> LogRecord:
        return self.record(node, join_point, "before", f"enter {join_point.signature}({join_point.args_summary})")

    def after(self, node: Any, join_point: JoinPoint, result: Any,
              error: Optional[Exception] = None) -> LogRecord:
        if error is not None:
            return self.record(node, join_point, "after",
                               f"exit {join_point.signature} error={type(error).__name__}", level="ERROR")
        return self.record(node, join_point, "after", f"exit {join_point.signature} -> {summarize_args([result])}")


@dataclass(frozen=True)
class CacheBinding:
    """How an operation's arguments map to a cache key and the write stamp of its source."""
    key: Callable[[Tuple[Any, ...]], Hashable]
    stamp: Callable[[Any, Tuple[Any, ...]], int]


def _reading_stamp(node: Any, args: Tuple[Any, ...]) -> int:
    owner = node.world.nodes.get(str(args[1]))
    return owner.readings.version(args[2]) if owner is not None else -1


CACHE_BINDINGS: Dict[Tuple[str, str], CacheBinding] = {
    ("DataTransfer", "get_reading"): CacheBinding(
        key=lambda args: (str(args[1]), args[2]),
        stamp=_reading_stamp,
    ),
    ("Handshaking", "lookup_capabilities"): CacheBinding(
        key=lambda args: (str(args[1]), CAPABILITIES_KEY),
        stamp=lambda node, args: node.capability_stamp(args[1]),
    ),
}


def _key_label(key: Hashable) -> str:
    return "/".join(str(part) for part in key) if isinstance(key, tuple) else str(key)


class CachingService:
    """
    Memoizes read operations in the calling device's ReadingCache.

    A cached entry remembers the write stamp of its source; when the source
    has been written since, the entry is invalidated and the call proceeds.
    """

    def __init__(self, source: str):
        self.source = source

    def _emit(self, node: Any, kind: str, join_point: JoinPoint, detail: Dict[str, Any]):
        node.world.emit(node.name, kind, join_point.module_name, join_point.op_name, self.source, detail)

    def around(self, node: Any, join_point: JoinPoint, args: Sequence[Any],
               proceed: Callable[[], Any]) -> Any:
        binding = CACHE_BINDINGS.get((join_point.module_name, join_point.op_name))
        if binding is None:
            return proceed()
        args = tuple(args)
        key = binding.key(args)
        stamp = binding.stamp(node, args)
        now = node.world.clock
        cache = node.cache
        label = _key_label(key)

        entry = cache.peek(key)
        miss_detail: Dict[str, Any] = {"key": label}
        if entry is not None:
            if entry.stamp != stamp:
                cache.invalidate(key)
                self._emit(node, "cache_invalidate", join_point, {"key": label, "reason": "write"})
            elif cache.get(key, now) is None:
                miss_detail["reason"] = "expired"
            else:
                self._emit(node, "cache_hit", join_point, {"key": label, "age": entry.age(now)})
                return entry.value

        self._emit(node, "cache_miss", join_point, miss_detail)
        result = proceed()
        evicted = cache.put(key, result, now, stamp)
        if evicted is not None:
            logger.debug("%s evicted cache entry %s", node.name, _key_label(evicted))
        return result


def synchronization_aspect(service: SynchronizationService = None) -> Aspect:
    """Around advice acquiring the module guard on every core operation; precedence 10."""
    service = service or SynchronizationService(SOURCE_ASPECT)

    def guard(invocation: Invocation) -> Any:
        return service.around(invocation.node, invocation.join_point, invocation.proceed)

    advice = Advice(AdvicePhase.AROUND, guard, SYNCHRONIZATION_ASPECT)
    return Aspect(SYNCHRONIZATION_ASPECT, ConcernTag("synchronization"), SYNCHRONIZATION_PRECEDENCE,
                  ((parse_pointcut(CORE_POINTCUT), advice),))


def logging_aspect(service: LoggingService = None) -> Aspect:
    """Before and After advice logging every core operation; precedence 20."""
    service = service or LoggingService(SOURCE_ASPECT)
    pointcut = parse_pointcut(CORE_POINTCUT)

    def log_entry(invocation: Invocation):
        service.before(invocation.node, invocation.join_point)

    def log_exit(invocation: Invocation, result: Any):
        service.after(invocation.node, invocation.join_point, result, invocation.error)

    return Aspect(LOGGING_ASPECT, ConcernTag("logging"), LOGGING_PRECEDENCE, (
        (pointcut, Advice(AdvicePhase.BEFORE, log_entry, LOGGING_ASPECT)),
        (pointcut, Advice(AdvicePhase.AFTER, log_exit, LOGGING_ASPECT)),
    ))


def caching_aspect(service: CachingService = None) -> Aspect:
    """Around advice memoizing get_reading and lookup_capabilities; precedence 30."""
    service = service or CachingService(SOURCE_ASPECT)

    def memoize(invocation: Invocation) -> Any:
        return service.around(invocation.node, invocation.join_point, invocation.args, invocation.proceed)

    advice = Advice(AdvicePhase.AROUND, memoize, CACHING_ASPECT)
    return Aspect(CACHING_ASPECT, ConcernTag("caching"), CACHING_PRECEDENCE,
                  ((parse_pointcut(CACHING_POINTCUT), advice),))


def reference_aspects() -> List[Aspect]:
    """The three aspects of the woven build in registration order."""
    return [synchronization_aspect(), logging_aspect(), caching_aspect()]


class TangledDispatcher:
    """
    Invokes core operations with synchronization, logging and caching
    written inline, the way an object-oriented build mixes them into every
    service method.
    """

    def __init__(self, registry: OperationRegistry):
        self.registry = registry
        self.synchronization = SynchronizationService(SOURCE_INLINE)
        self.logging = LoggingService(SOURCE_INLINE)
        self.caching = CachingService(SOURCE_INLINE)

    def wrappers_for(self, module_name: str, op_name: str) -> List[str]:
        """Names of the concerns wrapped around an operation, outermost first."""
        names = []
        if module_name in CORE_MODULES:
            names += [SYNCHRONIZATION_ASPECT, LOGGING_ASPECT]
        if (module_name, op_name) in CACHED_OPERATIONS:
            names.append(CACHING_ASPECT)
        return names

    def invoke(self, module_name: str, op_name: str, *args: Any) -> Any:
        operation = self.registry.operation(module_name, op_name)
        join_point = self.registry.join_point(module_name, op_name, args)
        node = args[0]
        synchronized = module_name in CORE_MODULES
        logged = module_name in CORE_MODULES
        cached = (module_name, op_name) in CACHED_OPERATIONS

        def run_core():
            return operation.behavior(*args)

        def run_cached():
            if cached:
                return self.caching.around(node, join_point, args, run_core)
            return run_core()

        def run_logged():
            if not logged:
                return run_cached()
            self.logging.before(node, join_point)
            try:
                result = run_cached()
            except Exception as exc:
                self.logging.after(node, join_point, None, exc)
                raise
            self.logging.after(node, join_point, result)
            return result

        if synchronized:
            return self.synchronization.around(node, join_point, run_logged)
        return run_logged()

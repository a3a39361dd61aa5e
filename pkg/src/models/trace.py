"""
Trace Models

Trace events written by the simulation, plus the typed records of the
logging and synchronization concerns that are serialized into them.
"""

import json
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping

SOURCE_CORE = "core"
SOURCE_INLINE = "inline"
SOURCE_ASPECT = "aspect"
SOURCES = (SOURCE_CORE, SOURCE_INLINE, SOURCE_ASPECT)

EVENT_KINDS = frozenset({
    "hello_sent", "challenge_sent", "confirm_sent", "session_established", "rejected",
    "frame_sent", "frame_dropped", "data", "ack", "nak", "delivered", "transfer_failed",
    "cache_hit", "cache_miss", "cache_invalidate", "guard_acquire", "guard_release",
    "log", "not_found",
})

LOG_LEVELS = ("DEBUG", "INFO", "WARN", "ERROR")


def _json_value(value: Any) -> Any:
    if isinstance(value, (bytes, bytearray)):
        return bytes(value).hex()
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _json_value(v) for k, v in value.items()}
    return value


@dataclass(frozen=True)
class TraceEvent:
    """
    One line of the JSONL trace.

    Attributes:
        tick: Simulation tick
        actor: Device the event happened on
        kind: Event kind from EVENT_KINDS
        module: Middleware module involved, or "transport"
        op: Operation involved
        source: "core", "inline" or "aspect"
        detail: Kind-specific key/value map
    """
    tick: int
    actor: str
    kind: str
    module: str = ""
    op: str = ""
    source: str = SOURCE_CORE
    detail: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown trace event kind {self.kind!r}")
        if self.source not in SOURCES:
            raise ValueError(f"unknown trace source {self.source!r}")

    def to_dict(self, include_source: bool = True) -> Dict[str, Any]:
        """Plain dict in the fixed field order."""
        data: Dict[str, Any] = {
            "tick": self.tick,
            "actor": self.actor,
            "kind": self.kind,
            "module": self.module,
            "op": self.op,
        }
        if include_source:
            data["source"] = self.source
        data["detail"] = _json_value(dict(self.detail))
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, separators=(", ", ": "))


def event_from_json(line: str) -> TraceEvent:
    """Rebuild an event from one JSONL line (byte values stay hex strings)."""
    data = json.loads(line)
    return TraceEvent(
        tick=data["tick"], actor=data["actor"], kind=data["kind"], module=data["module"],
        op=data["op"], source=data["source"], detail=data.get("detail", {}),
    )


@dataclass(frozen=True)
class LogRecord:
    """A record produced by the logging concern."""
    tick: int
    level: str
    module: str
    op: str
    phase: str
    detail: str
    source: str

    def __post_init__(self):
        if self.level not in LOG_LEVELS:
            raise ValueError(f"unknown log level {self.level!r}")

    def to_event(self, actor: str) -> TraceEvent:
        return TraceEvent(
            self.tick, actor, "log", self.module, self.op, self.source,
            {"level": self.level, "phase": self.phase, "message": self.detail},
        )


@dataclass(frozen=True)
class GuardEvent:
    """An acquire or release step of the synchronization guard protocol."""
    tick: int
    actor: str
    guard_name: str
    action: str
    depth: int

    def __post_init__(self):
        if self.action not in ("acquire", "release"):
            raise ValueError(f"unknown guard action {self.action!r}")
        if self.depth < 0:
            raise ValueError("guard depth must not be negative")

    def to_event(self, module: str, op: str, source: str) -> TraceEvent:
        return TraceEvent(
            self.tick, self.actor, f"guard_{self.action}", module, op, source,
            {"guard": self.guard_name, "depth": self.depth},
        )

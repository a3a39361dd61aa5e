"""
Transport Module

Deterministic discrete-tick world connecting the simulated devices: a lossy,
delayed link, the event loop, scheduled callbacks and the trace sink.

Per tick the world first delivers due frames in (due tick, send order), then
fires scheduled scenario actions, then protocol timers.
"""

import heapq
import itertools
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

from ..errors import ProtocolError
from ..models.protocol import Frame, FrameKind, UINT32_MASK
from ..models.scenario import LinkConfig
from ..models.trace import SOURCE_CORE, TraceEvent
from ..utils.logging_utils import get_logger
from .prng import SplitMix64

logger = get_logger(__name__)

TRANSPORT_MODULE = "transport"
PRIORITY_ACTION = 0
PRIORITY_TIMER = 1

TraceSink = Callable[[TraceEvent], None]


@dataclass(frozen=True)
class FrameFault:
    """
    Flip one bit of the next accepted frame matching kind (and receiver).

    Attributes:
        kind: Frame kind to corrupt
        bit: Bit index, taken modulo the width of the field
        field: "payload" or "seq"
        receiver: Restrict to frames sent to this device
    """
    kind: FrameKind
    bit: int = 0
    field: str = "payload"
    receiver: Optional[str] = None

    def __post_init__(self):
        if self.field not in ("payload", "seq"):
            raise ValueError(f"cannot corrupt field {self.field!r}")

    def matches(self, frame: Frame, receiver: str) -> bool:
        if frame.kind is not self.kind:
            return False
        if self.receiver is not None and self.receiver != receiver:
            return False
        return self.field == "seq" or len(frame.payload) > 0

    def apply(self, frame: Frame) -> Frame:
        if self.field == "seq":
            return replace(frame, seq=(frame.seq ^ (1 << (self.bit % 32))) & UINT32_MASK)
        bit = self.bit % (len(frame.payload) * 8)
        corrupted = bytearray(frame.payload)
        corrupted[bit // 8] ^= 1 << (bit % 8)
        return replace(frame, payload=bytes(corrupted))


class SimWorld:
    """
    A single-threaded simulation world.

    Attributes:
        link: Link configuration shared by both directions
        clock: Current tick
        rng: World PRNG, seeded from the link seed
        nodes: Attached devices by name; each provides receive(frame, sender)
        trace: Every event emitted so far
    """

    def __init__(self, link: Optional[LinkConfig] = None, trace_sink: Optional[TraceSink] = None):
        self.link = link or LinkConfig()
        self.clock = 0
        self.rng = SplitMix64(self.link.seed)
        self.nodes: Dict[str, Any] = {}
        self.trace: List[TraceEvent] = []
        self._sinks: List[TraceSink] = [trace_sink] if trace_sink else []
        self._counter = itertools.count()
        self._deliveries: List[Tuple[int, int, str, str, Frame]] = []
        self._callbacks: List[Tuple[int, int, int, Callable[[], Any]]] = []
        self._faults: List[FrameFault] = []
        self._processed_tick = -1

    def attach(self, name: str, node: Any):
        if name in self.nodes:
            raise ValueError(f"device {name} already attached")
        self.nodes[name] = node

    def node(self, name: str) -> Any:
        try:
            return self.nodes[str(name)]
        except KeyError:
            raise ProtocolError(f"unknown device {name}") from None

    def add_sink(self, sink: TraceSink):
        self._sinks.append(sink)

    def emit(self, actor: str, kind: str, module: str = "", op: str = "",
             source: str = SOURCE_CORE, detail: Optional[Dict[str, Any]] = None) -> TraceEvent:
        """Append an event to the trace and forward it to the sinks."""
        return self.record(TraceEvent(self.clock, str(actor), kind, module, op, source, detail or {}))

    def record(self, event: TraceEvent) -> TraceEvent:
        """Append a prebuilt event."""
        self.trace.append(event)
        for sink in self._sinks:
            sink(event)
        return event

    def inject_fault(self, fault: FrameFault):
        """Arm a one-shot corruption of the next matching accepted frame."""
        self._faults.append(fault)

    def send_frame(self, sender: str, receiver: str, frame: Frame, **extra: Any):
        """
        Put a frame on the link.

        Exactly one PRNG draw decides loss. Accepted frames are delivered at
        clock + delay; each call emits one frame_sent or frame_dropped event.

        Args:
            sender: Sending device
            receiver: Receiving device
            frame: Frame to send
            **extra: Additional trace detail

        Raises:
            ProtocolError: when there is no link between the devices
        """
        sender, receiver = str(sender), str(receiver)
        if sender == receiver or sender not in self.nodes or receiver not in self.nodes:
            raise ProtocolError(f"unknown link {sender} -> {receiver}")

        dropped = self.rng.chance(self.link.drop_probability)
        detail: Dict[str, Any] = {"to": receiver, **frame.describe(), **extra}
        if dropped:
            detail["reason"] = "loss"
            self.emit(sender, "frame_dropped", TRANSPORT_MODULE, "send_frame", detail=detail)
            return

        for index, fault in enumerate(self._faults):
            if fault.matches(frame, receiver):
                self._faults.pop(index)
                frame = fault.apply(frame)
                detail["corrupted"] = fault.field
                break

        due = self.clock + self.link.delay_ticks
        detail["due"] = due
        heapq.heappush(self._deliveries, (due, next(self._counter), sender, receiver, frame))
        self.emit(sender, "frame_sent", TRANSPORT_MODULE, "send_frame", detail=detail)

    def schedule(self, tick: int, callback: Callable[[], Any], priority: int = PRIORITY_ACTION):
        """
        Run a callback at a tick.

        Raises:
            ValueError: when the tick has already been processed
        """
        if tick <= self._processed_tick:
            raise ValueError(f"tick {tick} is already in the past")
        heapq.heappush(self._callbacks, (tick, priority, next(self._counter), callback))

    def schedule_in(self, delay: int, callback: Callable[[], Any]):
        """Arm a protocol timer delay ticks from now."""
        self.schedule(self.clock + max(delay, 1), callback, PRIORITY_TIMER)

    def pending(self) -> bool:
        return bool(self._deliveries or self._callbacks)

    def _next_due(self) -> Optional[int]:
        candidates = []
        if self._deliveries:
            candidates.append(self._deliveries[0][0])
        if self._callbacks:
            candidates.append(self._callbacks[0][0])
        return min(candidates) if candidates else None

    def _process_tick(self, tick: int):
        while self._deliveries and self._deliveries[0][0] == tick:
            _, _, sender, receiver, frame = heapq.heappop(self._deliveries)
            self.nodes[receiver].receive(frame, sender)
        while self._callbacks and self._callbacks[0][0] == tick:
            _, _, _, callback = heapq.heappop(self._callbacks)
            callback()
        self._processed_tick = tick

    def run_until(self, tick_limit: int) -> "SimWorld":
        """
        Advance the world up to tick_limit.

        Ticks without pending work are skipped; an idle world returns
        immediately without advancing the clock.

        Args:
            tick_limit: Last tick to process

        Returns:
            The world itself
        """
        if tick_limit < self.clock:
            raise ValueError(f"tick limit {tick_limit} is before the clock {self.clock}")
        while True:
            if self.clock > self._processed_tick:
                self._process_tick(self.clock)
            if self.clock >= tick_limit:
                break
            next_due = self._next_due()
            if next_due is None:
                break
            self.clock = min(max(next_due, self.clock + 1), tick_limit)
        logger.debug("world stopped at tick %d with %d events", self.clock, len(self.trace))
        return self

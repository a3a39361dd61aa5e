"""
Middleware Module

The simulated IoT middleware: four core service classes (Handshaking,
DataTransfer, Security, SessionRegistry) whose methods are registered as
interceptable operations, the per-device state they work on, and the
Middleware facade that builds them in tangled or woven form.

Every operation takes the acting DeviceNode as its first argument and every
cross-service call goes through Middleware.call so it can be intercepted.
"""

import itertools
from typing import Any, ClassVar, Dict, List, Optional, Tuple

from ..errors import ProtocolError
from ..models.aop import BuildMode, WeaveReport
from ..models.manifest import ConcernManifest
from ..models.protocol import (
    HANDSHAKE_KINDS,
    Delivery,
    DeviceId,
    Frame,
    FrameKind,
    HandshakePhase,
    HandshakeState,
    Session,
    TransferHandle,
    TransferState,
)
from ..models.scenario import DEFAULT_SHARED_KEY
from ..models.settings import SimulationSettings
from ..utils.logging_utils import get_logger
from .crosscut import TangledDispatcher, reference_aspects
from .handshake import (
    PENDING_PHASES,
    HandshakeContext,
    HandshakeResult,
    handshake_initiate,
    handshake_step,
    handshake_timeout,
)
from .mac import mac64, nonce_bytes
from .reading_cache import ReadingCache
from .transfer import TransferContext, TransferResult, pump, queue_transfer, transfer_handle_frame, transfer_timeout
from .transport import SimWorld
from .weaver import OperationRegistry, emit_manifest, weave

logger = get_logger(__name__)

READ_CAPABILITY = "sensor.read"


class ReadingStore:
    """Latest reading per sensor with a version bumped on every write."""

    def __init__(self):
        self._values: Dict[str, bytes] = {}
        self._versions: Dict[str, int] = {}

    def put(self, sensor_id: str, payload: bytes) -> int:
        self._values[sensor_id] = bytes(payload)
        self._versions[sensor_id] = self._versions.get(sensor_id, 0) + 1
        return self._versions[sensor_id]

    def get(self, sensor_id: str) -> Optional[bytes]:
        return self._values.get(sensor_id)

    def version(self, sensor_id: str) -> int:
        return self._versions.get(sensor_id, 0)

    def sensors(self) -> List[str]:
        return sorted(self._values)


class DeviceNode:
    """
    State of one device in a world.

    Attributes:
        device: Device identity
        world: World the device is attached to
        capabilities: Capabilities the device advertises
        handshakes: Handshake state per peer name
        sessions: Established sessions by session_id
        transfers: Stop-and-wait state by session_id
        readings: Local sensor readings
        cache: Reading cache used by the caching concern
        guard_stack: Guards currently held by this device
        deliveries: Payloads received from peers
        reads: (tick, peer, sensor, value) of scripted reads
    """

    def __init__(self, device: DeviceId, middleware: "Middleware"):
        self.device = device
        self.middleware = middleware
        self.world: SimWorld = middleware.world
        self.capabilities: Tuple[str, ...] = tuple(middleware.settings.default_capabilities)
        self.handshakes: Dict[str, HandshakeState] = {}
        self.sessions: Dict[int, Session] = {}
        self.transfers: Dict[int, TransferState] = {}
        self.readings = ReadingStore()
        self.cache = ReadingCache(middleware.settings.cache)
        self.guard_stack: List[str] = []
        self.deliveries: List[Delivery] = []
        self.reads: List[Tuple[int, str, str, bytes]] = []
        self._capability_stamps: Dict[str, int] = {}
        self._transfer_ids = itertools.count(1)

    @property
    def name(self) -> str:
        return self.device.name

    def trace_label(self) -> str:
        return self.name

    def handshake_state(self, peer: DeviceId) -> HandshakeState:
        return self.handshakes.get(peer.name) or HandshakeState(peer)

    def session_with(self, peer: Any) -> Optional[Session]:
        """Most recently established session with a peer."""
        for session in reversed(list(self.sessions.values())):
            if session.peer.name == str(peer):
                return session
        return None

    def capability_stamp(self, peer: Any) -> int:
        return self._capability_stamps.get(str(peer), 0)

    def touch_capabilities(self, peer: Any):
        self._capability_stamps[str(peer)] = self.capability_stamp(peer) + 1

    def remove_session(self, session_id: int) -> Optional[Session]:
        session = self.sessions.pop(session_id, None)
        if session is not None:
            self.transfers.pop(session_id, None)
            self.touch_capabilities(session.peer)
        return session

    def next_transfer_id(self) -> int:
        return next(self._transfer_ids)

    def receive(self, frame: Frame, sender: str):
        self.middleware.dispatch_frame(self, frame, sender)


class MiddlewareService:
    """
    Base of the core service classes.

    Subclasses list their operations with the core concern tags each one
    realizes; register() exposes the bound methods to the registry.
    """

    module_name: ClassVar[str] = ""
    operations: ClassVar[Tuple[Tuple[str, Tuple[str, ...]], ...]] = ()

    def __init__(self, middleware: "Middleware"):
        self.middleware = middleware

    @property
    def world(self) -> SimWorld:
        return self.middleware.world

    @property
    def settings(self) -> SimulationSettings:
        return self.middleware.settings

    def call(self, module_name: str, op_name: str, node: DeviceNode, *args: Any) -> Any:
        return self.middleware.call(module_name, op_name, node, *args)

    def emit(self, node: DeviceNode, kind: str, op: str, detail: Dict[str, Any]):
        self.world.emit(node.name, kind, self.module_name, op, detail=detail)

    def register(self, registry: OperationRegistry):
        for op_name, tags in self.operations:
            registry.register_operation(self.module_name, op_name, getattr(self, op_name), tags)


class Handshaking(MiddlewareService):
    """Three-way session establishment and the peer capabilities it learns."""

    module_name = "Handshaking"
    operations = (
        ("initiate", ("handshake_core",)),
        ("handle_frame", ("handshake_core", "session_mgmt")),
        ("lookup_capabilities", ("session_mgmt",)),
    )

    def _context(self, node: DeviceNode) -> HandshakeContext:
        return HandshakeContext(
            now=self.world.clock,
            shared_key=self.middleware.shared_key,
            protocol_version=self.settings.protocol_version,
            capabilities=node.capabilities,
            fresh_nonce=self.world.rng.next,
            issue_token=lambda a, b: self.call("Security", "issue_token", node, a, b),
            verify_token=lambda a, b, token: self.call("Security", "verify_token", node, a, b, token),
            has_session_with_nonce=lambda nonce: any(
                s.initiator_nonce == nonce for s in node.sessions.values()),
        )

    def initiate(self, node: DeviceNode, peer: DeviceId) -> Frame:
        """
        Send HELLO to a peer.

        Returns:
            The HELLO frame

        Raises:
            ProtocolError: unknown peer, session already established or handshake in flight
        """
        peer = DeviceId(str(peer))
        self.world.node(peer.name)
        if peer.name == node.name:
            raise ProtocolError(f"{node.name} cannot handshake with itself")
        result = handshake_initiate(node.handshake_state(peer), self._context(node))
        self._apply(node, peer, result, "initiate")
        return result.frames[0]

    def handle_frame(self, node: DeviceNode, frame: Frame, sender: str) -> str:
        """Advance the handshake with a peer; returns the resulting phase name."""
        peer = DeviceId(str(sender))
        result = handshake_step(node.handshake_state(peer), frame, self._context(node))
        self._apply(node, peer, result, "handle_frame")
        return result.state.phase.value

    def lookup_capabilities(self, node: DeviceNode, peer: DeviceId) -> Tuple[str, ...]:
        """Capabilities the peer announced for the current session; empty without one."""
        session = node.session_with(peer)
        return tuple(session.peer_capabilities) if session is not None else ()

    def _apply(self, node: DeviceNode, peer: DeviceId, result: HandshakeResult, op: str):
        previous = node.handshake_state(peer)
        node.handshakes[peer.name] = result.state
        for kind, detail in result.notes:
            self.emit(node, kind, op, detail)

        if (previous.phase is HandshakePhase.ESTABLISHED
                and result.state.phase is HandshakePhase.REJECTED):
            node.remove_session(previous.session_id)
        if result.session is not None:
            self.call("SessionRegistry", "register_session", node, result.session)

        for frame in result.frames:
            self.world.send_frame(node.name, peer.name, frame)
        if result.state.phase in PENDING_PHASES and any(
                frame.kind in (FrameKind.HELLO, FrameKind.CHALLENGE) for frame in result.frames):
            self._arm_timer(node, peer, result.state.nonce_local, result.state.retries)

    def _arm_timer(self, node: DeviceNode, peer: DeviceId, nonce: int, retries: int):
        def expire():
            result = handshake_timeout(node.handshake_state(peer), self._context(node),
                                       self.settings.max_retries, nonce, retries)
            self._apply(node, peer, result, "retransmit")

        self.world.schedule_in(self.settings.handshake_timeout_ticks, expire)


class DataTransfer(MiddlewareService):
    """Stop-and-wait transfer of readings and synchronous reads of a peer's readings."""

    module_name = "DataTransfer"
    operations = (
        ("send_reading", ("transfer_core",)),
        ("handle_frame", ("transfer_core", "integrity")),
        ("on_timeout", ("flow_control",)),
        ("get_reading", ("transfer_core",)),
        ("put_reading", ("transfer_core",)),
    )

    def _context(self, node: DeviceNode, session: Session) -> TransferContext:
        return TransferContext(
            sign=lambda frame: self.call("Security", "sign_frame", node, frame, session),
            verify=lambda frame: self.call("Security", "verify_frame", node, frame, session),
            max_retries=self.settings.max_retries,
        )

    def _session(self, node: DeviceNode, peer: Any) -> Session:
        session = self.call("SessionRegistry", "lookup_session", node, DeviceId(str(peer)))
        if session is None:
            raise ProtocolError(f"{node.name} has no session with {peer}")
        return session

    def send_reading(self, node: DeviceNode, peer: DeviceId, sensor_id: str, payload: bytes) -> TransferHandle:
        """
        Queue a reading for stop-and-wait transfer to a peer.

        Raises:
            ProtocolError: without a session, or for an empty payload
        """
        session = self._session(node, peer)
        state = node.transfers[session.session_id]
        transfer = queue_transfer(state, node.next_transfer_id(), sensor_id, bytes(payload),
                                  self.settings.chunk_size)
        self._apply(node, session, pump(state, self._context(node, session)), "send_reading")
        return TransferHandle(session.session_id, transfer.transfer_id, transfer.first_seq, len(transfer.chunks))

    def handle_frame(self, node: DeviceNode, frame: Frame, sender: str) -> int:
        """Process DATA, ACK or NAK; returns the number of payloads delivered."""
        session = node.sessions.get(frame.session_id)
        if session is None or session.peer.name != str(sender):
            self.emit(node, "frame_dropped", "handle_frame", {**frame.describe(), "reason": "unknown_session"})
            return 0
        state = node.transfers[session.session_id]
        result = transfer_handle_frame(state, frame, self._context(node, session))
        self._apply(node, session, result, "handle_frame")
        return len(result.delivered)

    def on_timeout(self, node: DeviceNode, session_id: int, attempt: int) -> bool:
        """Retransmit the outstanding DATA frame; returns whether a frame was resent."""
        session = node.sessions.get(session_id)
        if session is None:
            return False
        result = transfer_timeout(node.transfers[session_id], self._context(node, session), attempt)
        self._apply(node, session, result, "on_timeout")
        return bool(result.frames)

    def get_reading(self, node: DeviceNode, peer: DeviceId, sensor_id: str) -> bytes:
        """
        Read the latest reading a peer stores for a sensor.

        The peer answers within the tick; the answer is tagged with the
        peer's session key and checked against ours.

        Returns:
            The reading, or b"" when the peer has none (traced as not_found)

        Raises:
            ProtocolError: without a session or when the peer does not serve reads
        """
        session = self._session(node, peer)
        capabilities = self.call("Handshaking", "lookup_capabilities", node, DeviceId(str(peer)))
        if READ_CAPABILITY not in capabilities:
            raise ProtocolError(f"{peer} does not advertise {READ_CAPABILITY}")
        owner = self.world.node(str(peer))
        owner_session = owner.sessions.get(session.session_id)
        if owner_session is None:
            raise ProtocolError(f"{peer} has not completed the session")

        value = owner.readings.get(sensor_id)
        if value is None:
            self.emit(node, "not_found", "get_reading", {"peer": str(peer), "sensor": sensor_id})
            return b""
        tag = mac64(owner_session.session_key, sensor_id.encode("utf-8") + value)
        if tag != mac64(session.session_key, sensor_id.encode("utf-8") + value):
            raise ProtocolError(f"reading {sensor_id} from {peer} failed its integrity check")
        return value

    def put_reading(self, node: DeviceNode, sensor_id: str, payload: bytes) -> int:
        """Store a local reading; returns the new version of the sensor."""
        if not sensor_id:
            raise ProtocolError("sensor id is empty")
        return node.readings.put(sensor_id, bytes(payload))

    def _apply(self, node: DeviceNode, session: Session, result: TransferResult, op: str):
        state = result.state
        for kind, detail in result.notes:
            self.emit(node, kind, op, detail)
        for sensor_id, payload in result.delivered:
            node.deliveries.append(Delivery(self.world.clock, session.peer.name, sensor_id, payload))
        for frame in result.frames:
            extra = {"retry": state.retry_count} if frame.kind is FrameKind.DATA else {}
            self.world.send_frame(node.name, session.peer.name, frame, **extra)
        if result.arm_timer:
            self._arm_timer(node, session.session_id, state.attempt)

    def _arm_timer(self, node: DeviceNode, session_id: int, attempt: int):
        def expire():
            state = node.transfers.get(session_id)
            if state is not None and state.awaiting_ack and state.attempt == attempt:
                self.call("DataTransfer", "on_timeout", node, session_id, attempt)

        self.world.schedule_in(self.settings.ack_timeout_ticks, expire)


class Security(MiddlewareService):
    """Frame MACs and handshake tokens derived from the pre-shared key."""

    module_name = "Security"
    operations = (
        ("sign_frame", ("security_core",)),
        ("verify_frame", ("security_core",)),
        ("issue_token", ("key_mgmt",)),
        ("verify_token", ("key_mgmt", "audit")),
    )

    def sign_frame(self, node: DeviceNode, frame: Frame, session: Session) -> Frame:
        return frame.with_mac(mac64(session.session_key, frame.signed_bytes()))

    def verify_frame(self, node: DeviceNode, frame: Frame, session: Session) -> bool:
        return frame.mac == mac64(session.session_key, frame.signed_bytes())

    def issue_token(self, node: DeviceNode, nonce_a: int, nonce_b: int) -> int:
        return mac64(self.middleware.shared_key, nonce_bytes(nonce_a, nonce_b))

    def verify_token(self, node: DeviceNode, nonce_a: int, nonce_b: int, token: int) -> bool:
        valid = token == mac64(self.middleware.shared_key, nonce_bytes(nonce_a, nonce_b))
        if not valid:
            logger.info("%s rejected handshake token at tick %d", node.name, self.world.clock)
        return valid


class SessionRegistry(MiddlewareService):
    """The device's table of established sessions."""

    module_name = "SessionRegistry"
    operations = (
        ("register_session", ("registry_core",)),
        ("lookup_session", ("lookup",)),
        ("evict_expired", ("eviction",)),
    )

    def register_session(self, node: DeviceNode, session: Session) -> Session:
        """
        Record an established session.

        Raises:
            ProtocolError: when the session_id is already registered
        """
        if session.session_id in node.sessions:
            raise ProtocolError(f"session {session.session_id:016x} already registered")
        node.sessions[session.session_id] = session
        node.transfers[session.session_id] = TransferState(session.session_id)
        node.touch_capabilities(session.peer)
        return session

    def lookup_session(self, node: DeviceNode, peer: DeviceId) -> Optional[Session]:
        return node.session_with(peer)

    def evict_expired(self, node: DeviceNode, max_age: int) -> int:
        """
        Remove sessions whose age is at least max_age ticks.

        Returns:
            Number of sessions removed
        """
        now = self.world.clock
        stale = [s for s in node.sessions.values() if s.age(now) >= max_age]
        for session in stale:
            node.remove_session(session.session_id)
            state = node.handshake_state(session.peer)
            if state.phase is HandshakePhase.ESTABLISHED and state.session_id == session.session_id:
                node.handshakes[session.peer.name] = state.transition(HandshakePhase.IDLE)
        return len(stale)


SERVICE_CLASSES = (Handshaking, DataTransfer, Security, SessionRegistry)


class Middleware:
    """
    The middleware of one world, built in tangled or woven mode.

    Attributes:
        world: Simulation world
        mode: Build mode
        shared_key: Pre-shared key of the devices
        settings: Protocol constants
        registry: Registry of the core operations
        aspects: The reference aspects (woven, or described by the tangled build)
        weave_report: Result of weaving; None in tangled mode
        nodes: Devices by name
    """

    def __init__(self, world: SimWorld, mode: BuildMode, shared_key: int = DEFAULT_SHARED_KEY,
                 settings: Optional[SimulationSettings] = None):
        self.world = world
        self.mode = mode
        self.shared_key = shared_key
        self.settings = settings or SimulationSettings()
        self.registry = OperationRegistry()
        self.services = [service_class(self) for service_class in SERVICE_CLASSES]
        for service in self.services:
            service.register(self.registry)
        self.aspects = reference_aspects()
        self.nodes: Dict[str, DeviceNode] = {}

        self.weave_report: Optional[WeaveReport] = None
        if mode is BuildMode.WOVEN:
            self.weave_report = weave(self.registry, self.aspects)
            self._dispatcher = self.registry
        else:
            self._dispatcher = TangledDispatcher(self.registry)
        logger.debug("built %s middleware with %d operations", mode.value, len(self.registry.operations()))

    def add_device(self, name: str) -> DeviceNode:
        node = DeviceNode(DeviceId(name), self)
        self.world.attach(name, node)
        self.nodes[name] = node
        return node

    def node(self, name: Any) -> DeviceNode:
        try:
            return self.nodes[str(name)]
        except KeyError:
            raise ProtocolError(f"unknown device {name}") from None

    def call(self, module_name: str, op_name: str, node: DeviceNode, *args: Any) -> Any:
        """Invoke a registered operation through the build's interception."""
        return self._dispatcher.invoke(module_name, op_name, node, *args)

    def dispatch_frame(self, node: DeviceNode, frame: Frame, sender: str):
        module_name = "Handshaking" if frame.kind in HANDSHAKE_KINDS else "DataTransfer"
        try:
            self.call(module_name, "handle_frame", node, frame, sender)
        except ProtocolError as exc:
            self.world.emit(node.name, "frame_dropped", module_name, "handle_frame",
                            detail={**frame.describe(), "reason": "protocol_error", "error": str(exc)})

    def concerns_for(self, module_name: str, op_name: str) -> List[str]:
        """Cross-cutting concerns applied to an operation, outermost first."""
        if self.weave_report is not None:
            return self.weave_report.aspect_names_for(module_name, op_name)
        return self._dispatcher.wrappers_for(module_name, op_name)

    def manifest(self, version_label: Optional[str] = None) -> ConcernManifest:
        """Concern manifest of this build."""
        return emit_manifest(self.registry, self.aspects, self.mode, version_label)


def build_middleware(world: SimWorld, mode: BuildMode, devices: Tuple[str, ...] = (),
                     shared_key: int = DEFAULT_SHARED_KEY,
                     settings: Optional[SimulationSettings] = None) -> Middleware:
    """
    Build the reference middleware and attach devices.

    Args:
        world: World to attach to
        mode: BuildMode.TANGLED or BuildMode.WOVEN
        devices: Device names
        shared_key: Pre-shared key
        settings: Protocol constants

    Returns:
        Middleware
    """
    middleware = Middleware(world, mode, shared_key, settings)
    for name in devices:
        middleware.add_device(name)
    return middleware

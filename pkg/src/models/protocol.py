"""
Protocol Models

Devices, frames, sessions and the per-peer protocol state of the middleware.
"""

import struct
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Tuple

from ..errors import ProtocolError
from .manifest import is_identifier

MAX_PAYLOAD = 256
UINT64_MASK = (1 << 64) - 1
UINT32_MASK = (1 << 32) - 1


@dataclass(frozen=True)
class DeviceId:
    """Name of a simulated IoT device."""
    name: str

    def __post_init__(self):
        if not is_identifier(self.name):
            raise ValueError(f"invalid device name {self.name!r}")

    def __str__(self) -> str:
        return self.name

    def trace_label(self) -> str:
        return self.name


class FrameKind(Enum):
    HELLO = "HELLO"
    CHALLENGE = "CHALLENGE"
    CONFIRM = "CONFIRM"
    REJECT = "REJECT"
    DATA = "DATA"
    ACK = "ACK"
    NAK = "NAK"


HANDSHAKE_KINDS: FrozenSet[FrameKind] = frozenset(
    {FrameKind.HELLO, FrameKind.CHALLENGE, FrameKind.CONFIRM, FrameKind.REJECT}
)
TRANSFER_KINDS: FrozenSet[FrameKind] = frozenset({FrameKind.DATA, FrameKind.ACK, FrameKind.NAK})


@dataclass(frozen=True)
class Frame:
    """
    One frame on the simulated link.

    DATA frames also carry the transfer they belong to (first_seq,
    chunk_count, sensor_id) so the receiver can reassemble. The MAC covers
    the header and the payload.

    Attributes:
        kind: Frame kind
        session_id: Session the frame belongs to; 0 during the handshake
        seq: Sequence number
        payload: At most 256 bytes
        mac: Integrity tag, 0 when unsigned
        sensor_id: Sensor of the transfer (DATA only)
        first_seq: First sequence number of the transfer (DATA only)
        chunk_count: Number of chunks of the transfer (DATA only)
    """
    kind: FrameKind
    session_id: int = 0
    seq: int = 0
    payload: bytes = b""
    mac: int = 0
    sensor_id: str = ""
    first_seq: int = 0
    chunk_count: int = 0

    def __post_init__(self):
        if len(self.payload) > MAX_PAYLOAD:
            raise ProtocolError(f"frame payload of {len(self.payload)} bytes exceeds {MAX_PAYLOAD}")
        if not 0 <= self.session_id <= UINT64_MASK or not 0 <= self.mac <= UINT64_MASK:
            raise ProtocolError("session_id and mac must be 64-bit unsigned")
        if not 0 <= self.seq <= UINT32_MASK:
            raise ProtocolError("seq must be 32-bit unsigned")
        if self.kind in TRANSFER_KINDS and self.session_id == 0:
            raise ProtocolError(f"{self.kind.value} frame requires a session")

    def header_bytes(self) -> bytes:
        """Header fields covered by the MAC."""
        return (struct.pack("<QIII", self.session_id, self.seq, self.first_seq, self.chunk_count)
                + self.kind.value.encode("ascii") + b"\x00" + self.sensor_id.encode("utf-8"))

    def signed_bytes(self) -> bytes:
        return self.header_bytes() + self.payload

    def with_mac(self, mac: int) -> "Frame":
        return replace(self, mac=mac)

    def trace_label(self) -> str:
        return f"{self.kind.value}#{self.seq}"

    def describe(self) -> Dict[str, object]:
        """Trace detail of the frame."""
        detail: Dict[str, object] = {"frame": self.kind.value, "seq": self.seq, "size": len(self.payload)}
        if self.session_id:
            detail["session"] = f"{self.session_id:016x}"
        return detail


@dataclass(frozen=True)
class Session:
    """
    An established session with a peer.

    Attributes:
        session_id: Unique per registry
        peer: The other device
        session_key: Key used for frame MACs
        established_tick: Tick at which the session was established
        peer_capabilities: Capabilities the peer advertised
        initiator_nonce: Nonce of the HELLO that opened the session
    """
    session_id: int
    peer: DeviceId
    session_key: int
    established_tick: int
    peer_capabilities: Tuple[str, ...] = ()
    initiator_nonce: int = 0

    def age(self, now: int) -> int:
        return now - self.established_tick

    def trace_label(self) -> str:
        return f"session:{self.session_id:016x}"


class HandshakePhase(Enum):
    IDLE = "Idle"
    HELLO_SENT = "HelloSent"
    CHALLENGE_SENT = "ChallengeSent"
    ESTABLISHED = "Established"
    REJECTED = "Rejected"


LEGAL_TRANSITIONS: FrozenSet[Tuple[HandshakePhase, HandshakePhase]] = frozenset({
    (HandshakePhase.IDLE, HandshakePhase.HELLO_SENT),
    (HandshakePhase.IDLE, HandshakePhase.CHALLENGE_SENT),
    (HandshakePhase.HELLO_SENT, HandshakePhase.ESTABLISHED),
    (HandshakePhase.CHALLENGE_SENT, HandshakePhase.ESTABLISHED),
    (HandshakePhase.HELLO_SENT, HandshakePhase.REJECTED),
    (HandshakePhase.CHALLENGE_SENT, HandshakePhase.REJECTED),
    (HandshakePhase.ESTABLISHED, HandshakePhase.REJECTED),
    (HandshakePhase.ESTABLISHED, HandshakePhase.IDLE),
    (HandshakePhase.REJECTED, HandshakePhase.IDLE),
})


@dataclass(frozen=True)
class HandshakeState:
    """
    Handshake state machine position for one peer.

    Attributes:
        peer: The other device
        phase: Current phase
        nonce_local: Nonce this side contributed
        nonce_remote: Nonce the peer contributed
        retries: Retransmissions of the pending HELLO or CHALLENGE
        remote_capabilities: Capabilities announced by the peer
        session_id: Session opened by this handshake, 0 before establishment
    """
    peer: DeviceId
    phase: HandshakePhase = HandshakePhase.IDLE
    nonce_local: int = 0
    nonce_remote: int = 0
    retries: int = 0
    remote_capabilities: Tuple[str, ...] = ()
    session_id: int = 0

    def transition(self, phase: HandshakePhase, **changes) -> "HandshakeState":
        """
        Move to another phase.

        Raises:
            ProtocolError: when the transition is not a legal one
        """
        if phase is not self.phase and (self.phase, phase) not in LEGAL_TRANSITIONS:
            raise ProtocolError(f"illegal handshake transition {self.phase.value} -> {phase.value}")
        return replace(self, phase=phase, **changes)


@dataclass
class OutgoingTransfer:
    """A queued or active stop-and-wait transfer."""
    transfer_id: int
    sensor_id: str
    chunks: List[bytes]
    first_seq: int
    index: int = 0

    @property
    def current_seq(self) -> int:
        return self.first_seq + self.index

    @property
    def done(self) -> bool:
        return self.index >= len(self.chunks)


@dataclass
class TransferState:
    """
    Stop-and-wait state of one session, both directions.

    Attributes:
        session_id: Session the state belongs to
        next_seq: Sequence number the next queued transfer starts at
        awaiting_ack: Whether a DATA frame is outstanding
        retry_count: Retransmissions of the outstanding frame
        attempt: Counter of DATA sends; timers carry it to detect staleness
        queue: Outgoing transfers, the active one first
        expected_seq: Next sequence number the receiver accepts
        reassembly: Received chunks of the incoming transfer keyed by seq
        rx_first_seq: First sequence number of the incoming transfer
        rx_chunk_count: Chunk count of the incoming transfer
        rx_sensor_id: Sensor of the incoming transfer
    """
    session_id: int
    next_seq: int = 0
    awaiting_ack: bool = False
    retry_count: int = 0
    attempt: int = 0
    queue: List[OutgoingTransfer] = field(default_factory=list)
    expected_seq: int = 0
    reassembly: Dict[int, bytes] = field(default_factory=dict)
    rx_first_seq: Optional[int] = None
    rx_chunk_count: int = 0
    rx_sensor_id: str = ""

    @property
    def active(self) -> Optional[OutgoingTransfer]:
        return self.queue[0] if self.queue else None


@dataclass(frozen=True)
class TransferHandle:
    """Returned by send_reading to identify a queued transfer."""
    session_id: int
    transfer_id: int
    first_seq: int
    chunk_count: int

    def trace_label(self) -> str:
        return f"transfer:{self.transfer_id}"


@dataclass(frozen=True)
class Delivery:
    """A reassembled payload surfaced by the receiver."""
    tick: int
    peer: str
    sensor_id: str
    payload: bytes

"""
Handshake Module

Three-way nonce challenge that establishes a session between two devices::

    initiator                      responder
      HELLO     {version, nonce_a, caps}   ->
                <- CHALLENGE {nonce_a, nonce_b, caps}
      CONFIRM   {nonce_a, nonce_b, token}  ->

The functions here are pure over HandshakeState; side effects (nonce
generation, token checks, session lookups) come in through the context.
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, NamedTuple, Optional, Tuple

from ..errors import ProtocolError
from ..models.protocol import (
    Frame,
    FrameKind,
    HandshakePhase,
    HandshakeState,
    Session,
)
from .mac import mac64, nonce_bytes

PENDING_PHASES = (HandshakePhase.HELLO_SENT, HandshakePhase.CHALLENGE_SENT)

TraceNote = Tuple[str, Dict[str, Any]]


@dataclass(frozen=True)
class HandshakeContext:
    """
    Everything a handshake step needs from its device.

    Attributes:
        now: Current tick
        shared_key: Pre-shared key of the device pair
        protocol_version: Version this device speaks
        capabilities: Capabilities this device advertises
        fresh_nonce: Draws a nonce from the world PRNG
        issue_token: (nonce_a, nonce_b) -> token
        verify_token: (nonce_a, nonce_b, token) -> valid
        has_session_with_nonce: Whether a session opened by this HELLO nonce exists
    """
    now: int
    shared_key: int
    protocol_version: int
    capabilities: Tuple[str, ...]
    fresh_nonce: Callable[[], int]
    issue_token: Callable[[int, int], int]
    verify_token: Callable[[int, int, int], bool]
    has_session_with_nonce: Callable[[int], bool]


class HandshakeResult(NamedTuple):
    """New state, frames to send to the peer, the session if one was established, trace notes."""
    state: HandshakeState
    frames: Tuple[Frame, ...] = ()
    session: Optional[Session] = None
    notes: Tuple[TraceNote, ...] = ()


def encode_capabilities(capabilities: Tuple[str, ...]) -> bytes:
    return ",".join(capabilities).encode("utf-8")


def decode_capabilities(raw: bytes) -> Tuple[str, ...]:
    text = raw.decode("utf-8", errors="replace")
    return tuple(item for item in text.split(",") if item)


def _u64(raw: bytes, offset: int) -> int:
    return int.from_bytes(raw[offset:offset + 8], "little")


def hello_frame(version: int, nonce_a: int, capabilities: Tuple[str, ...]) -> Frame:
    return Frame(FrameKind.HELLO, payload=bytes([version]) + nonce_bytes(nonce_a)
                 + encode_capabilities(capabilities))


def challenge_frame(nonce_a: int, nonce_b: int, capabilities: Tuple[str, ...]) -> Frame:
    return Frame(FrameKind.CHALLENGE, payload=nonce_bytes(nonce_a, nonce_b)
                 + encode_capabilities(capabilities))


def confirm_frame(nonce_a: int, nonce_b: int, token: int) -> Frame:
    return Frame(FrameKind.CONFIRM, payload=nonce_bytes(nonce_a, nonce_b, token))


def reject_frame(nonce_a: int, nonce_b: int, reason: str) -> Frame:
    return Frame(FrameKind.REJECT, payload=nonce_bytes(nonce_a, nonce_b) + reason.encode("utf-8"))


def derive_session(shared_key: int, nonce_a: int, nonce_b: int) -> Tuple[int, int]:
    """
    Session id and key of the handshake with the given nonces.

    Returns:
        (session_id, session_key)
    """
    session_id = mac64(shared_key, b"sid" + nonce_bytes(nonce_a, nonce_b))
    session_key = mac64(shared_key, nonce_bytes(nonce_b, nonce_a))
    return session_id, session_key


def _nonce_note(value: int) -> str:
    return f"{value:016x}"


def _dropped(state: HandshakeState, frame: Frame, reason: str) -> HandshakeResult:
    return HandshakeResult(state, notes=(("frame_dropped", {**frame.describe(), "reason": reason}),))


def _reply_reject(state: HandshakeState, nonce_a: int, nonce_b: int, reason: str) -> HandshakeResult:
    note = ("rejected", {"peer": state.peer.name, "reason": reason, "replied": True})
    return HandshakeResult(state, (reject_frame(nonce_a, nonce_b, reason),), notes=(note,))


def handshake_initiate(state: HandshakeState, ctx: HandshakeContext) -> HandshakeResult:
    """
    Start a handshake with state.peer.

    Args:
        state: Current state for the peer (Idle or Rejected)
        ctx: Device context

    Returns:
        Result carrying the HELLO frame and state HelloSent

    Raises:
        ProtocolError: when a session is established or a handshake is in flight
    """
    if state.phase is HandshakePhase.ESTABLISHED:
        raise ProtocolError(f"session with {state.peer} already established")
    if state.phase in PENDING_PHASES:
        raise ProtocolError(f"handshake with {state.peer} already in flight")
    if state.phase is HandshakePhase.REJECTED:
        state = state.transition(HandshakePhase.IDLE)

    nonce_a = ctx.fresh_nonce()
    state = state.transition(HandshakePhase.HELLO_SENT, nonce_local=nonce_a, nonce_remote=0,
                             retries=0, remote_capabilities=(), session_id=0)
    frame = hello_frame(ctx.protocol_version, nonce_a, ctx.capabilities)
    note = ("hello_sent", {"peer": state.peer.name, "nonce": _nonce_note(nonce_a)})
    return HandshakeResult(state, (frame,), notes=(note,))


def handshake_step(state: HandshakeState, frame: Frame, ctx: HandshakeContext) -> HandshakeResult:
    """
    Advance the handshake with one incoming frame.

    Out-of-order frames are dropped with a trace note and leave the state
    unchanged.

    Args:
        state: Current state for the sending peer
        frame: Incoming HELLO, CHALLENGE, CONFIRM or REJECT
        ctx: Device context

    Returns:
        HandshakeResult

    Raises:
        ProtocolError: on a frame kind outside the handshake
    """
    handlers = {
        FrameKind.HELLO: _on_hello,
        FrameKind.CHALLENGE: _on_challenge,
        FrameKind.CONFIRM: _on_confirm,
        FrameKind.REJECT: _on_reject,
    }
    handler = handlers.get(frame.kind)
    if handler is None:
        raise ProtocolError(f"{frame.kind.value} is not a handshake frame")
    return handler(state, frame, ctx)


def _on_hello(state: HandshakeState, frame: Frame, ctx: HandshakeContext) -> HandshakeResult:
    raw = frame.payload
    if len(raw) < 9:
        return _dropped(state, frame, "malformed")
    version, nonce_a, capabilities = raw[0], _u64(raw, 1), decode_capabilities(raw[9:])

    if version != ctx.protocol_version:
        return _reply_reject(state, nonce_a, 0, "version")
    if state.phase is HandshakePhase.ESTABLISHED or ctx.has_session_with_nonce(nonce_a):
        return _reply_reject(state, nonce_a, 0, "replay")
    if state.phase is HandshakePhase.CHALLENGE_SENT:
        if nonce_a != state.nonce_remote:
            return _reply_reject(state, nonce_a, 0, "busy")
        # retransmitted HELLO: our CHALLENGE was lost
        note = ("challenge_sent", {"peer": state.peer.name, "nonce": _nonce_note(state.nonce_local),
                                   "repeat": True})
        return HandshakeResult(state, (challenge_frame(nonce_a, state.nonce_local, ctx.capabilities),),
                               notes=(note,))
    if state.phase is HandshakePhase.HELLO_SENT:
        return _reply_reject(state, nonce_a, 0, "busy")

    if state.phase is HandshakePhase.REJECTED:
        state = state.transition(HandshakePhase.IDLE)
    nonce_b = ctx.fresh_nonce()
    state = state.transition(HandshakePhase.CHALLENGE_SENT, nonce_local=nonce_b, nonce_remote=nonce_a,
                             retries=0, remote_capabilities=capabilities, session_id=0)
    note = ("challenge_sent", {"peer": state.peer.name, "nonce": _nonce_note(nonce_b)})
    return HandshakeResult(state, (challenge_frame(nonce_a, nonce_b, ctx.capabilities),), notes=(note,))


def _on_challenge(state: HandshakeState, frame: Frame, ctx: HandshakeContext) -> HandshakeResult:
    raw = frame.payload
    if len(raw) < 16:
        return _dropped(state, frame, "malformed")
    nonce_a, nonce_b, capabilities = _u64(raw, 0), _u64(raw, 8), decode_capabilities(raw[16:])

    if state.phase is HandshakePhase.ESTABLISHED and (nonce_a, nonce_b) == (state.nonce_local, state.nonce_remote):
        # our CONFIRM was lost
        token = ctx.issue_token(nonce_a, nonce_b)
        note = ("confirm_sent", {"peer": state.peer.name, "repeat": True})
        return HandshakeResult(state, (confirm_frame(nonce_a, nonce_b, token),), notes=(note,))
    if state.phase is not HandshakePhase.HELLO_SENT or nonce_a != state.nonce_local:
        return _dropped(state, frame, "out_of_order")

    token = ctx.issue_token(nonce_a, nonce_b)
    session_id, session_key = derive_session(ctx.shared_key, nonce_a, nonce_b)
    session = Session(session_id, state.peer, session_key, ctx.now, capabilities, initiator_nonce=nonce_a)
    state = state.transition(HandshakePhase.ESTABLISHED, nonce_remote=nonce_b,
                             remote_capabilities=capabilities, session_id=session_id)
    notes = (
        ("confirm_sent", {"peer": state.peer.name}),
        ("session_established", {"peer": state.peer.name, "session": f"{session_id:016x}",
                                 "role": "initiator"}),
    )
    return HandshakeResult(state, (confirm_frame(nonce_a, nonce_b, token),), session, notes)


def _on_confirm(state: HandshakeState, frame: Frame, ctx: HandshakeContext) -> HandshakeResult:
    raw = frame.payload
    if len(raw) < 24:
        return _dropped(state, frame, "malformed")
    nonce_a, nonce_b, token = _u64(raw, 0), _u64(raw, 8), _u64(raw, 16)

    matches_state = (nonce_a, nonce_b) == (state.nonce_remote, state.nonce_local)
    if state.phase is HandshakePhase.ESTABLISHED and matches_state:
        return _dropped(state, frame, "duplicate")
    if state.phase is not HandshakePhase.CHALLENGE_SENT or not matches_state:
        return _dropped(state, frame, "out_of_order")

    if not ctx.verify_token(nonce_a, nonce_b, token):
        state = state.transition(HandshakePhase.REJECTED)
        return _reply_reject(state, nonce_a, nonce_b, "bad_token")

    session_id, session_key = derive_session(ctx.shared_key, nonce_a, nonce_b)
    session = Session(session_id, state.peer, session_key, ctx.now, state.remote_capabilities,
                      initiator_nonce=nonce_a)
    state = state.transition(HandshakePhase.ESTABLISHED, session_id=session_id)
    note = ("session_established", {"peer": state.peer.name, "session": f"{session_id:016x}",
                                    "role": "responder"})
    return HandshakeResult(state, (), session, (note,))


def _on_reject(state: HandshakeState, frame: Frame, ctx: HandshakeContext) -> HandshakeResult:
    raw = frame.payload
    if len(raw) < 16:
        return _dropped(state, frame, "malformed")
    nonce_a, nonce_b = _u64(raw, 0), _u64(raw, 8)
    reason = raw[16:].decode("utf-8", errors="replace") or "unspecified"

    if state.phase is HandshakePhase.HELLO_SENT and nonce_a == state.nonce_local:
        state = state.transition(HandshakePhase.REJECTED)
        return HandshakeResult(state, notes=(("rejected", {"peer": state.peer.name, "reason": reason}),))
    if state.phase is HandshakePhase.ESTABLISHED and (nonce_a, nonce_b) == (state.nonce_local, state.nonce_remote):
        state = state.transition(HandshakePhase.REJECTED)
        note = ("rejected", {"peer": state.peer.name, "reason": reason, "teardown": True})
        return HandshakeResult(state, notes=(note,))
    return _dropped(state, frame, "stale_reject")


def handshake_timeout(state: HandshakeState, ctx: HandshakeContext, max_retries: int,
                      nonce: int, retries: int) -> HandshakeResult:
    """
    Handle the retransmission timer of a pending HELLO or CHALLENGE.

    Timers armed for an earlier attempt (different nonce or retry count)
    leave the state untouched.

    Args:
        state: Current state
        ctx: Device context
        max_retries: Retransmissions allowed before giving up
        nonce: nonce_local when the timer was armed
        retries: Retry count when the timer was armed

    Returns:
        HandshakeResult with the retransmitted frame, or state Rejected on exhaustion
    """
    if state.phase not in PENDING_PHASES or state.nonce_local != nonce or state.retries != retries:
        return HandshakeResult(state)
    if state.retries >= max_retries:
        state = state.transition(HandshakePhase.REJECTED)
        return HandshakeResult(state, notes=(("rejected", {"peer": state.peer.name, "reason": "timeout"}),))

    state = state.transition(state.phase, retries=state.retries + 1)
    if state.phase is HandshakePhase.HELLO_SENT:
        frame = hello_frame(ctx.protocol_version, state.nonce_local, ctx.capabilities)
        note = ("hello_sent", {"peer": state.peer.name, "nonce": _nonce_note(state.nonce_local),
                               "retry": state.retries})
    else:
        frame = challenge_frame(state.nonce_remote, state.nonce_local, ctx.capabilities)
        note = ("challenge_sent", {"peer": state.peer.name, "nonce": _nonce_note(state.nonce_local),
                                   "retry": state.retries})
    return HandshakeResult(state, (frame,), notes=(note,))

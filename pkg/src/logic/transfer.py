"""
Transfer Module

Stop-and-wait ARQ over an established session. A reading is split into
chunks; the next DATA frame departs only after the previous one is
acknowledged. A NAK or an ACK timeout triggers a retransmission; after
max_retries retransmissions of the same frame the transfer fails.

TransferState is updated in place; the functions return it for chaining.
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, NamedTuple, Tuple

from ..errors import ProtocolError
from ..models.protocol import Frame, FrameKind, OutgoingTransfer, TransferState
from .mac import fnv1a64

TraceNote = Tuple[str, Dict[str, Any]]


@dataclass(frozen=True)
class TransferContext:
    """
    Device services needed by the transfer functions.

    Attributes:
        sign: Returns the frame with its MAC set
        verify: Checks the MAC of a frame
        max_retries: Retransmissions allowed per frame
    """
    sign: Callable[[Frame], Frame]
    verify: Callable[[Frame], bool]
    max_retries: int = 5


class TransferResult(NamedTuple):
    """Updated state, frames to send, delivered (sensor, payload) pairs, trace notes, timer to arm."""
    state: TransferState
    frames: Tuple[Frame, ...] = ()
    delivered: Tuple[Tuple[str, bytes], ...] = ()
    notes: Tuple[TraceNote, ...] = ()
    arm_timer: bool = False


def chunk_payload(payload: bytes, chunk_size: int) -> List[bytes]:
    """
    Split a payload into chunks of at most chunk_size bytes.

    Raises:
        ProtocolError: on an empty payload
    """
    if not payload:
        raise ProtocolError("payload is empty")
    return [payload[i:i + chunk_size] for i in range(0, len(payload), chunk_size)]


def payload_digest(payload: bytes) -> str:
    return f"{fnv1a64(payload):016x}"


def queue_transfer(state: TransferState, transfer_id: int, sensor_id: str, payload: bytes,
                   chunk_size: int) -> OutgoingTransfer:
    """
    Queue a reading for transfer; sequence numbers continue from next_seq.

    Returns:
        The queued transfer
    """
    chunks = chunk_payload(payload, chunk_size)
    transfer = OutgoingTransfer(transfer_id, sensor_id, chunks, first_seq=state.next_seq)
    state.next_seq += len(chunks)
    state.queue.append(transfer)
    return transfer


def _data_frame(state: TransferState, transfer: OutgoingTransfer, ctx: TransferContext) -> Frame:
    frame = Frame(
        FrameKind.DATA,
        session_id=state.session_id,
        seq=transfer.current_seq,
        payload=transfer.chunks[transfer.index],
        sensor_id=transfer.sensor_id,
        first_seq=transfer.first_seq,
        chunk_count=len(transfer.chunks),
    )
    return ctx.sign(frame)


def pump(state: TransferState, ctx: TransferContext,
         notes: Tuple[TraceNote, ...] = ()) -> TransferResult:
    """Send the next chunk when nothing is outstanding."""
    transfer = state.active
    if state.awaiting_ack or transfer is None:
        return TransferResult(state, notes=notes)
    state.awaiting_ack = True
    state.retry_count = 0
    state.attempt += 1
    return TransferResult(state, (_data_frame(state, transfer, ctx),), notes=notes, arm_timer=True)


def _retransmit(state: TransferState, ctx: TransferContext, cause: str) -> TransferResult:
    transfer = state.active
    if state.retry_count >= ctx.max_retries:
        note = ("transfer_failed", {"sensor": transfer.sensor_id, "seq": transfer.current_seq,
                                    "retries": state.retry_count, "cause": cause})
        state.queue.pop(0)
        state.awaiting_ack = False
        state.retry_count = 0
        return pump(state, ctx, (note,))
    state.retry_count += 1
    state.attempt += 1
    return TransferResult(state, (_data_frame(state, transfer, ctx),), arm_timer=True)


def _matches_outstanding(state: TransferState, frame: Frame) -> bool:
    return state.awaiting_ack and state.active is not None and frame.seq == state.active.current_seq


def _dropped(state: TransferState, frame: Frame, reason: str) -> TransferResult:
    return TransferResult(state, notes=(("frame_dropped", {**frame.describe(), "reason": reason}),))


def _on_ack(state: TransferState, frame: Frame, ctx: TransferContext) -> TransferResult:
    if not ctx.verify(frame):
        return _dropped(state, frame, "bad_mac")
    if not _matches_outstanding(state, frame):
        return _dropped(state, frame, "stale_ack")
    transfer = state.active
    transfer.index += 1
    state.awaiting_ack = False
    state.retry_count = 0
    if transfer.done:
        state.queue.pop(0)
    return pump(state, ctx)


def _on_nak(state: TransferState, frame: Frame, ctx: TransferContext) -> TransferResult:
    if not ctx.verify(frame):
        return _dropped(state, frame, "bad_mac")
    if not _matches_outstanding(state, frame):
        return _dropped(state, frame, "stale_nak")
    return _retransmit(state, ctx, "nak")


def _reply(state: TransferState, kind: FrameKind, seq: int, ctx: TransferContext) -> Frame:
    return ctx.sign(Frame(kind, session_id=state.session_id, seq=seq))


def _on_data(state: TransferState, frame: Frame, ctx: TransferContext) -> TransferResult:
    if not ctx.verify(frame):
        return TransferResult(state, (_reply(state, FrameKind.NAK, frame.seq, ctx),),
                              notes=(("nak", {"seq": frame.seq}),))

    starts_transfer = frame.seq == frame.first_seq and frame.first_seq >= state.expected_seq
    continues_transfer = frame.seq == state.expected_seq and frame.first_seq == state.rx_first_seq
    if starts_transfer:
        state.reassembly.clear()
        state.rx_first_seq = frame.first_seq
        state.rx_chunk_count = frame.chunk_count
        state.rx_sensor_id = frame.sensor_id
    elif not continues_transfer:
        if frame.seq < state.expected_seq:
            return TransferResult(state, (_reply(state, FrameKind.ACK, frame.seq, ctx),),
                                  notes=(("ack", {"seq": frame.seq, "duplicate": True}),))
        return _dropped(state, frame, "out_of_order")

    state.reassembly[frame.seq] = frame.payload
    state.expected_seq = frame.seq + 1
    notes: List[TraceNote] = [
        ("data", {"seq": frame.seq, "first_seq": frame.first_seq, "size": len(frame.payload)}),
        ("ack", {"seq": frame.seq}),
    ]
    delivered: Tuple[Tuple[str, bytes], ...] = ()
    last_seq = state.rx_first_seq + state.rx_chunk_count - 1
    if frame.seq == last_seq:
        payload = b"".join(state.reassembly[seq] for seq in range(state.rx_first_seq, last_seq + 1))
        delivered = ((state.rx_sensor_id, payload),)
        notes.append(("delivered", {"sensor": state.rx_sensor_id, "size": len(payload),
                                    "digest": payload_digest(payload)}))
        state.reassembly.clear()
        state.rx_first_seq = None
        state.rx_chunk_count = 0
        state.rx_sensor_id = ""
    return TransferResult(state, (_reply(state, FrameKind.ACK, frame.seq, ctx),), delivered, tuple(notes))


def transfer_handle_frame(state: TransferState, frame: Frame, ctx: TransferContext) -> TransferResult:
    """
    Process one incoming DATA, ACK or NAK frame of the session.

    DATA with a valid MAC is buffered and acknowledged; a bad MAC is answered
    with NAK; a duplicate is re-acknowledged without being delivered again.
    ACK advances the sender, NAK makes it retransmit.

    Args:
        state: Transfer state of the session
        frame: Incoming frame
        ctx: Device services

    Returns:
        TransferResult

    Raises:
        ProtocolError: on a frame kind outside the transfer protocol
    """
    if frame.kind is FrameKind.DATA:
        return _on_data(state, frame, ctx)
    if frame.kind is FrameKind.ACK:
        return _on_ack(state, frame, ctx)
    if frame.kind is FrameKind.NAK:
        return _on_nak(state, frame, ctx)
    raise ProtocolError(f"{frame.kind.value} is not a transfer frame")


def transfer_timeout(state: TransferState, ctx: TransferContext, attempt: int) -> TransferResult:
    """Retransmit the outstanding frame if the timer armed for attempt is still current."""
    if not state.awaiting_ack or state.attempt != attempt:
        return TransferResult(state)
    return _retransmit(state, ctx, "timeout")

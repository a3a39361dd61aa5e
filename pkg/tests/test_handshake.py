import pytest

from src.errors import ProtocolError
from src.logic.handshake import (
    confirm_frame,
    derive_session,
    handshake_initiate,
    handshake_step,
    handshake_timeout,
    reject_frame,
)
from src.logic.mac import mac64, nonce_bytes
from src.models.protocol import DeviceId, Frame, FrameKind, HandshakePhase, HandshakeState

from .conftest import TEST_KEY, handshake_context

NONCE_A = 0xA1A1
NONCE_B = 0xB2B2


@pytest.fixture
def exchange():
    """Initiator a and responder b run the full exchange step by step."""
    ctx_a = handshake_context([NONCE_A], capabilities=("sensor.read", "transfer.arq"))
    ctx_b = handshake_context([NONCE_B], capabilities=("sensor.write",))
    hello = handshake_initiate(HandshakeState(DeviceId("b")), ctx_a)
    challenge = handshake_step(HandshakeState(DeviceId("a")), hello.frames[0], ctx_b)
    confirm = handshake_step(hello.state, challenge.frames[0], ctx_a)
    done = handshake_step(challenge.state, confirm.frames[0], ctx_b)
    return {"ctx_a": ctx_a, "ctx_b": ctx_b, "hello": hello, "challenge": challenge,
            "confirm": confirm, "done": done}


def _note_kinds(result):
    return [kind for kind, _ in result.notes]


def test_full_exchange_establishes_matching_sessions(exchange):
    hello, challenge, confirm, done = (exchange[k] for k in ("hello", "challenge", "confirm", "done"))
    assert [f.kind for f in hello.frames] == [FrameKind.HELLO]
    assert challenge.state.phase is HandshakePhase.CHALLENGE_SENT
    assert [f.kind for f in challenge.frames] == [FrameKind.CHALLENGE]
    assert confirm.state.phase is HandshakePhase.ESTABLISHED
    assert done.state.phase is HandshakePhase.ESTABLISHED
    assert done.frames == ()

    session_id, session_key = derive_session(TEST_KEY, NONCE_A, NONCE_B)
    assert confirm.session.session_id == done.session.session_id == session_id
    assert confirm.session.session_key == done.session.session_key == session_key
    assert confirm.session.initiator_nonce == done.session.initiator_nonce == NONCE_A
    assert confirm.session.peer_capabilities == ("sensor.write",)
    assert done.session.peer_capabilities == ("sensor.read", "transfer.arq")
    assert _note_kinds(confirm) == ["confirm_sent", "session_established"]
    assert done.notes[0][1]["role"] == "responder"


def test_session_id_and_key_differ():
    session_id, session_key = derive_session(TEST_KEY, NONCE_A, NONCE_B)
    assert session_id != session_key
    assert derive_session(TEST_KEY, NONCE_B, NONCE_A) != (session_id, session_key)


def test_bad_token_rejects(exchange):
    token = mac64(TEST_KEY, nonce_bytes(NONCE_A, NONCE_B))
    forged = confirm_frame(NONCE_A, NONCE_B, token ^ 1)
    result = handshake_step(exchange["challenge"].state, forged, exchange["ctx_b"])
    assert result.state.phase is HandshakePhase.REJECTED
    assert result.session is None
    assert [f.kind for f in result.frames] == [FrameKind.REJECT]
    assert result.frames[0].payload[16:] == b"bad_token"


def test_different_keys_cannot_confirm():
    ctx_a = handshake_context([NONCE_A], key=1)
    ctx_b = handshake_context([NONCE_B], key=2)
    hello = handshake_initiate(HandshakeState(DeviceId("b")), ctx_a)
    challenge = handshake_step(HandshakeState(DeviceId("a")), hello.frames[0], ctx_b)
    confirm = handshake_step(hello.state, challenge.frames[0], ctx_a)
    result = handshake_step(challenge.state, confirm.frames[0], ctx_b)
    assert result.state.phase is HandshakePhase.REJECTED


def test_replayed_hello_after_establishment_is_rejected(exchange):
    established = exchange["done"].state
    result = handshake_step(established, exchange["hello"].frames[0], exchange["ctx_b"])
    assert result.state is established
    assert result.frames[0].kind is FrameKind.REJECT
    assert result.frames[0].payload[16:] == b"replay"


def test_hello_with_a_used_nonce_is_rejected(exchange):
    ctx = handshake_context([NONCE_B], known_nonces=(NONCE_A,))
    idle = HandshakeState(DeviceId("a"))
    result = handshake_step(idle, exchange["hello"].frames[0], ctx)
    assert result.state.phase is HandshakePhase.IDLE
    assert result.frames[0].payload[16:] == b"replay"


def test_version_mismatch_is_rejected(exchange):
    ctx = handshake_context([NONCE_B], version=2)
    result = handshake_step(HandshakeState(DeviceId("a")), exchange["hello"].frames[0], ctx)
    assert result.state.phase is HandshakePhase.IDLE
    assert result.frames[0].payload[16:] == b"version"
    assert result.notes[0] == ("rejected", {"peer": "a", "reason": "version", "replied": True})


def test_retransmitted_hello_repeats_the_challenge(exchange):
    pending = exchange["challenge"].state
    result = handshake_step(pending, exchange["hello"].frames[0], exchange["ctx_b"])
    assert result.state is pending
    assert result.frames == exchange["challenge"].frames
    assert result.notes[0][1]["repeat"] is True


def test_lost_confirm_is_resent_on_repeated_challenge(exchange):
    result = handshake_step(exchange["confirm"].state, exchange["challenge"].frames[0], exchange["ctx_a"])
    assert result.frames == exchange["confirm"].frames
    assert result.session is None


def test_duplicate_confirm_is_dropped(exchange):
    result = handshake_step(exchange["done"].state, exchange["confirm"].frames[0], exchange["ctx_b"])
    assert result.frames == ()
    assert result.notes[0][1]["reason"] == "duplicate"


def test_out_of_order_frames_are_dropped(exchange):
    idle = HandshakeState(DeviceId("a"))
    result = handshake_step(idle, exchange["confirm"].frames[0], exchange["ctx_b"])
    assert result.state is idle
    assert result.notes[0] == ("frame_dropped", {"frame": "CONFIRM", "seq": 0, "size": 24,
                                                 "reason": "out_of_order"})


def test_matching_reject_ends_pending_hello(exchange):
    pending = exchange["hello"].state
    result = handshake_step(pending, reject_frame(NONCE_A, 0, "busy"), exchange["ctx_a"])
    assert result.state.phase is HandshakePhase.REJECTED
    assert result.notes[0][1]["reason"] == "busy"


def test_stale_reject_is_dropped(exchange):
    pending = exchange["hello"].state
    result = handshake_step(pending, reject_frame(0xDEAD, 0, "busy"), exchange["ctx_a"])
    assert result.state is pending
    assert result.notes[0][1]["reason"] == "stale_reject"


def test_timeouts_retry_then_give_up(exchange):
    ctx = exchange["ctx_a"]
    state = exchange["hello"].state
    for expected_retry in (1, 2):
        result = handshake_timeout(state, ctx, 2, NONCE_A, expected_retry - 1)
        assert result.state.retries == expected_retry
        assert result.frames == exchange["hello"].frames
        state = result.state
    result = handshake_timeout(state, ctx, 2, NONCE_A, 2)
    assert result.state.phase is HandshakePhase.REJECTED
    assert result.notes == (("rejected", {"peer": "b", "reason": "timeout"}),)


def test_stale_timer_is_ignored(exchange):
    state = handshake_timeout(exchange["hello"].state, exchange["ctx_a"], 3, NONCE_A, 0).state
    result = handshake_timeout(state, exchange["ctx_a"], 3, NONCE_A, 0)
    assert result.state is state
    assert result.frames == ()
    assert handshake_timeout(exchange["done"].state, exchange["ctx_b"], 3, NONCE_B, 0).frames == ()


def test_initiate_refuses_busy_states(exchange):
    with pytest.raises(ProtocolError):
        handshake_initiate(exchange["confirm"].state, exchange["ctx_a"])
    with pytest.raises(ProtocolError):
        handshake_initiate(exchange["hello"].state, exchange["ctx_a"])


def test_rejected_state_may_start_again(exchange):
    rejected = exchange["hello"].state.transition(HandshakePhase.REJECTED)
    result = handshake_initiate(rejected, handshake_context([0x77]))
    assert result.state.phase is HandshakePhase.HELLO_SENT
    assert result.state.nonce_local == 0x77


def test_illegal_transitions_and_foreign_frames():
    idle = HandshakeState(DeviceId("a"))
    with pytest.raises(ProtocolError):
        idle.transition(HandshakePhase.ESTABLISHED)
    with pytest.raises(ProtocolError):
        handshake_step(idle, Frame(FrameKind.DATA, session_id=1), handshake_context([]))

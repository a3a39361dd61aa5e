import pytest

from src.errors import ProtocolError
from src.logic.prng import SplitMix64
from src.logic.transport import FrameFault, SimWorld
from src.models.protocol import Frame, FrameKind
from src.models.scenario import LinkConfig


class RecordingNode:
    def __init__(self, world, log):
        self.world = world
        self.log = log

    def receive(self, frame, sender):
        self.log.append((self.world.clock, frame.kind, sender, frame.payload))


def _world(delay=1, drop=0.0, seed=0):
    world = SimWorld(LinkConfig(delay, drop, seed))
    log = []
    world.attach("a", RecordingNode(world, log))
    world.attach("b", RecordingNode(world, log))
    return world, log


def _data(payload=b"\x00\x00", seq=0):
    return Frame(FrameKind.DATA, session_id=1, seq=seq, payload=payload)


def test_frames_arrive_after_link_delay():
    world, log = _world(delay=3)
    world.send_frame("a", "b", Frame(FrameKind.HELLO))
    world.run_until(10)
    assert log == [(3, FrameKind.HELLO, "a", b"")]
    sent = [e for e in world.trace if e.kind == "frame_sent"]
    assert sent[0].detail["due"] == 3
    assert sent[0].detail["to"] == "b"


def test_idle_world_does_not_advance():
    world, _ = _world()
    world.run_until(50)
    assert world.clock == 0
    assert not world.pending()


def test_run_until_rejects_limits_before_the_clock():
    world, _ = _world(delay=5)
    world.send_frame("a", "b", Frame(FrameKind.HELLO))
    world.run_until(20)
    with pytest.raises(ValueError):
        world.run_until(2)


def test_deliveries_precede_actions_and_actions_precede_timers():
    world, log = _world(delay=1)
    world.schedule_in(1, lambda: log.append("timer"))
    world.schedule(1, lambda: log.append("action"))
    world.send_frame("a", "b", Frame(FrameKind.HELLO))
    world.run_until(5)
    assert log == [(1, FrameKind.HELLO, "a", b""), "action", "timer"]


def test_same_tick_deliveries_keep_send_order():
    world, log = _world(delay=2)
    world.send_frame("a", "b", _data(b"\x01", seq=0))
    world.send_frame("b", "a", _data(b"\x02", seq=0))
    world.send_frame("a", "b", _data(b"\x03", seq=1))
    world.run_until(5)
    assert [entry[3] for entry in log] == [b"\x01", b"\x02", b"\x03"]


def test_each_send_draws_once():
    world, _ = _world(seed=11)
    reference = SplitMix64(11)
    for _ in range(4):
        world.send_frame("a", "b", Frame(FrameKind.HELLO))
        reference.next()
    assert world.rng.state == reference.state


def test_losses_replay_with_the_same_seed():
    def outcome(seed):
        world, _ = _world(drop=0.5, seed=seed)
        for _ in range(60):
            world.send_frame("a", "b", Frame(FrameKind.HELLO))
        return [e.kind for e in world.trace]

    first = outcome(7)
    assert first == outcome(7)
    assert 0 < first.count("frame_dropped") < 60
    assert outcome(8) != first


def test_dropped_frames_are_never_delivered():
    world, log = _world(drop=0.5, seed=3)
    for _ in range(40):
        world.send_frame("a", "b", Frame(FrameKind.HELLO))
    world.run_until(10)
    assert len(log) == sum(1 for e in world.trace if e.kind == "frame_sent")


def test_fault_flips_one_bit_once():
    world, log = _world()
    world.inject_fault(FrameFault(FrameKind.DATA, bit=9))
    world.send_frame("a", "b", _data())
    world.send_frame("a", "b", _data(seq=1))
    world.run_until(5)
    assert [entry[3] for entry in log] == [b"\x00\x02", b"\x00\x00"]
    sent = [e for e in world.trace if e.kind == "frame_sent"]
    assert sent[0].detail["corrupted"] == "payload"
    assert "corrupted" not in sent[1].detail


def test_fault_respects_receiver_and_kind():
    world, log = _world()
    world.inject_fault(FrameFault(FrameKind.DATA, receiver="a", field="seq"))
    world.send_frame("a", "b", _data(seq=4))
    world.send_frame("b", "a", Frame(FrameKind.HELLO))
    world.send_frame("b", "a", _data(seq=4))
    world.run_until(5)
    assert [e.detail.get("corrupted") for e in world.trace if e.kind == "frame_sent"] == [None, None, "seq"]


def test_fault_field_is_validated():
    with pytest.raises(ValueError):
        FrameFault(FrameKind.DATA, field="mac")


def test_scheduling_in_the_past_fails():
    world, _ = _world(delay=3)
    world.send_frame("a", "b", Frame(FrameKind.HELLO))
    world.run_until(10)
    with pytest.raises(ValueError):
        world.schedule(3, lambda: None)


@pytest.mark.parametrize("sender, receiver", [("a", "c"), ("a", "a"), ("z", "b")])
def test_unknown_links_are_rejected(sender, receiver):
    world, _ = _world()
    with pytest.raises(ProtocolError):
        world.send_frame(sender, receiver, Frame(FrameKind.HELLO))
    with pytest.raises(ProtocolError):
        world.node("missing")


def test_sinks_see_every_event():
    seen = []
    world = SimWorld(trace_sink=seen.append)
    world.emit("a", "log", detail={"message": "hi"})
    assert seen == world.trace
    assert seen[0].tick == 0

"""Shared fixtures: shipped files, reference builds and scenario generators."""

import random
from pathlib import Path

import pytest

from src.logic.experiment import DEMO_SCENARIO, DEMO_SEED
from src.logic.mac import mac64, nonce_bytes
from src.logic.handshake import HandshakeContext
from src.logic.middleware import build_middleware
from src.logic.scenario_parser import parse_scenario
from src.logic.transport import SimWorld
from src.models.aop import BuildMode
from src.models.scenario import LinkConfig

REPO_ROOT = Path(__file__).resolve().parents[1]
MANIFEST_DIR = REPO_ROOT / "manifests"
SCENARIO_DIR = REPO_ROOT / "scenarios"
TEST_KEY = 0x5EED


@pytest.fixture
def manifest_dir() -> Path:
    return MANIFEST_DIR


@pytest.fixture
def scenario_dir() -> Path:
    return SCENARIO_DIR


@pytest.fixture
def demo_scenario():
    return parse_scenario(DEMO_SCENARIO).with_seed(DEMO_SEED)


@pytest.fixture(params=[BuildMode.TANGLED, BuildMode.WOVEN], ids=lambda mode: mode.value)
def mode(request) -> BuildMode:
    return request.param


def make_pair(mode: BuildMode, delay: int = 1, drop: float = 0.0, seed: int = 0, settings=None):
    """World with devices a and b attached to a middleware of the given mode."""
    world = SimWorld(LinkConfig(delay, drop, seed))
    middleware = build_middleware(world, mode, ("a", "b"), TEST_KEY, settings)
    return world, middleware


def establish(world, middleware, initiator: str = "a", responder: str = "b", until: int = 10):
    middleware.call("Handshaking", "initiate", middleware.node(initiator), middleware.node(responder).device)
    world.run_until(world.clock + until)


def kinds(trace, actor=None):
    return [event.kind for event in trace if actor is None or event.actor == actor]


def handshake_context(nonces, key: int = TEST_KEY, version: int = 1,
                      capabilities=("sensor.read",), known_nonces=(), now: int = 0) -> HandshakeContext:
    """Context with a scripted nonce sequence and tokens derived from key."""
    supply = iter(nonces)
    return HandshakeContext(
        now=now,
        shared_key=key,
        protocol_version=version,
        capabilities=tuple(capabilities),
        fresh_nonce=lambda: next(supply),
        issue_token=lambda a, b: mac64(key, nonce_bytes(a, b)),
        verify_token=lambda a, b, token: token == mac64(key, nonce_bytes(a, b)),
        has_session_with_nonce=lambda nonce: nonce in known_nonces,
    )


def random_scenario_text(rng: random.Random, actions: int = 12, horizon: int = 120, run: int = 400) -> str:
    """A random two-device script mixing handshakes, sends, reads and puts."""
    delay = rng.randint(1, 3)
    drop = round(rng.uniform(0.0, 0.3), 3)
    lines = [
        "devices a b",
        f"link delay={delay} drop={drop} seed={rng.randrange(1 << 32)}",
        f"key {rng.randrange(1, 1 << 64):#x}",
        "at 0 a handshake b",
    ]
    sensors = ["temp", "hum", "co2"]
    for _ in range(actions):
        tick = rng.randint(0, horizon)
        actor, peer = rng.sample(["a", "b"], 2)
        verb = rng.choice(["handshake", "send", "send", "read", "read", "put"])
        sensor = rng.choice(sensors)
        if verb == "handshake":
            lines.append(f"at {tick} {actor} handshake {peer}")
        elif verb == "put":
            lines.append(f'at {tick} {actor} put {sensor} "{rng.randint(0, 999)}"')
        elif verb == "read":
            lines.append(f"at {tick} {actor} read {peer} {sensor}")
        else:
            payload = bytes(rng.randrange(256) for _ in range(rng.randint(1, 700)))
            lines.append(f"at {tick} {actor} send {peer} {sensor} 0x{payload.hex()}")
    lines.append(f"run {run}")
    return "\n".join(lines) + "\n"

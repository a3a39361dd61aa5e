"""
Scenario Models

Link configuration and the parsed form of scenario scripts.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

from .protocol import DeviceId, UINT64_MASK

DEFAULT_SHARED_KEY = 0x5EED
DEFAULT_RUN_LIMIT = 1000


@dataclass(frozen=True)
class LinkConfig:
    """
    The link between the two devices.

    Attributes:
        delay_ticks: Ticks between send and delivery, at least 1
        drop_probability: Loss probability in [0, 1)
        seed: Seed of the world PRNG
    """
    delay_ticks: int = 1
    drop_probability: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.delay_ticks < 1:
            raise ValueError("delay must be at least one tick")
        if not 0.0 <= self.drop_probability < 1.0:
            raise ValueError("drop probability must be in [0, 1)")
        if not 0 <= self.seed <= UINT64_MASK:
            raise ValueError("seed must be a 64-bit unsigned integer")


class ActionVerb(Enum):
    HANDSHAKE = "handshake"
    SEND = "send"
    READ = "read"
    PUT = "put"


@dataclass(frozen=True)
class ScenarioAction:
    """
    One scripted action.

    Attributes:
        at_tick: Tick the action fires at
        actor: Device performing the action
        verb: What the device does
        peer: Other device (handshake, send, read)
        sensor_id: Sensor (send, read, put)
        payload: Reading bytes (send, put)
        line: Line of the statement in the script
    """
    at_tick: int
    actor: DeviceId
    verb: ActionVerb
    peer: Optional[DeviceId] = None
    sensor_id: str = ""
    payload: bytes = b""
    line: int = 0


@dataclass(frozen=True)
class Scenario:
    """
    A fully resolved scenario.

    Attributes:
        devices: The two devices
        link: Link configuration
        shared_key: Pre-shared key of the device pair
        actions: Actions sorted by (at_tick, file order)
        run_limit: Last tick simulated
    """
    devices: Tuple[DeviceId, ...]
    link: LinkConfig = LinkConfig()
    shared_key: int = DEFAULT_SHARED_KEY
    actions: Tuple[ScenarioAction, ...] = ()
    run_limit: int = DEFAULT_RUN_LIMIT

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, link=replace(self.link, seed=seed))

"""
Settings Models

Tunable constants of the simulated middleware.
"""

from dataclasses import dataclass, field
from typing import Tuple


@dataclass
class CacheConfig:
    """
    Reading cache configuration.

    Attributes:
        capacity: Maximum number of entries per device cache
        ttl_ticks: Entries older than this many ticks are never served
    """
    capacity: int = 64
    ttl_ticks: int = 100

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("cache capacity must be positive")
        if self.ttl_ticks < 1:
            raise ValueError("cache ttl must be positive")


@dataclass
class SimulationSettings:
    """
    Protocol constants of the middleware.

    Attributes:
        chunk_size: Maximum DATA payload per frame
        ack_timeout_ticks: Ticks before an unacknowledged DATA frame is resent
        max_retries: Retransmissions allowed per frame before giving up
        handshake_timeout_ticks: Ticks before HELLO or CHALLENGE is resent
        protocol_version: Version byte carried by HELLO
        default_capabilities: Capabilities every device advertises
        cache: Reading cache configuration
    """
    chunk_size: int = 256
    ack_timeout_ticks: int = 8
    max_retries: int = 5
    handshake_timeout_ticks: int = 8
    protocol_version: int = 1
    default_capabilities: Tuple[str, ...] = ("sensor.read", "sensor.write", "transfer.arq")
    cache: CacheConfig = field(default_factory=CacheConfig)

    def __post_init__(self):
        if not 1 <= self.chunk_size <= 256:
            raise ValueError("chunk_size must be within 1..256")
        if self.ack_timeout_ticks < 1 or self.handshake_timeout_ticks < 1:
            raise ValueError("timeouts must be at least one tick")
        if self.max_retries < 0:
            raise ValueError("max_retries must not be negative")

"""
Reading Cache Module

Per-device LRU cache with a time-to-live measured in simulation ticks.
"""

from collections import OrderedDict
from dataclasses import dataclass
from typing import Any, Hashable, List, Optional

from ..models.settings import CacheConfig


@dataclass
class CacheEntry:
    """
    A cached result.

    Attributes:
        value: Cached value
        inserted_tick: Tick the value was stored at
        stamp: Write stamp of the source when the value was stored
    """
    value: Any
    inserted_tick: int
    stamp: int = 0

    def age(self, now: int) -> int:
        return now - self.inserted_tick


class ReadingCache:
    """
    LRU cache bounded by capacity; entries older than ttl_ticks are never served.

    The OrderedDict keeps least recently used entries first.
    """

    def __init__(self, config: Optional[CacheConfig] = None):
        self.config = config or CacheConfig()
        self._entries: "OrderedDict[Hashable, CacheEntry]" = OrderedDict()

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: Hashable) -> bool:
        return key in self._entries

    def keys(self) -> List[Hashable]:
        """Keys from least to most recently used."""
        return list(self._entries)

    def peek(self, key: Hashable) -> Optional[CacheEntry]:
        """Entry for key without touching its recency."""
        return self._entries.get(key)

    def is_fresh(self, entry: CacheEntry, now: int) -> bool:
        return entry.age(now) <= self.config.ttl_ticks

    def get(self, key: Hashable, now: int) -> Optional[CacheEntry]:
        """
        Entry for key if it is still fresh; marks it most recently used.

        Expired entries are removed.
        """
        entry = self._entries.get(key)
        if entry is None:
            return None
        if not self.is_fresh(entry, now):
            del self._entries[key]
            return None
        self._entries.move_to_end(key)
        return entry

    def put(self, key: Hashable, value: Any, now: int, stamp: int = 0) -> Optional[Hashable]:
        """
        Store a value as most recently used.

        Returns:
            The key evicted to stay within capacity, if any
        """
        if key in self._entries:
            self._entries.move_to_end(key)
        self._entries[key] = CacheEntry(value, now, stamp)
        if len(self._entries) > self.config.capacity:
            evicted, _ = self._entries.popitem(last=False)
            return evicted
        return None

    def invalidate(self, key: Hashable) -> bool:
        return self._entries.pop(key, None) is not None

    def clear(self):
        self._entries.clear()

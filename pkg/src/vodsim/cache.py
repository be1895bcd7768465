"""LRFU web cache.

Every resident entry carries a score that decays by a factor 2^-lambda per
tick and gains +1 on each reference. Decay is applied lazily: an entry stores
its score as of `last_update` and is brought forward only when read, which is
the same number as decaying every entry on every tick.

lambda = 0 gives pure frequency counting (LFU); a large lambda makes the
most recent reference dominate (LRU).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Tuple


class NotResidentError(KeyError):
    pass


class CacheNotFullError(RuntimeError):
    pass


class UndefinedRatioError(ZeroDivisionError):
    pass


@dataclass
class CacheEntry:
    key: Hashable
    hit_count: float
    last_update: int


class LrfuCache:
    def __init__(self, capacity: int, lam: float = 0.5):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        if lam < 0:
            raise ValueError(f"lambda must be >= 0, got {lam}")
        self.capacity = capacity
        self.lam = lam
        self.entries: dict = {}
        self.hits = 0
        self.misses = 0

    def __len__(self):
        return len(self.entries)

    def __contains__(self, key):
        return key in self.entries

    @property
    def full(self) -> bool:
        return len(self.entries) >= self.capacity

    def _factor(self, gap: int) -> float:
        if gap < 0:
            raise ValueError(f"time went backwards by {-gap} ticks")
        return 2.0 ** (-self.lam * gap)

    def decayed_count(self, key, now: int) -> float:
        """Score of a resident entry as of `now`; does not touch state."""
        try:
            entry = self.entries[key]
        except KeyError:
            raise NotResidentError(key) from None
        return entry.hit_count * self._factor(now - entry.last_update)

    def reference(self, key, now: int, insert: bool = True) -> bool:
        """Process one request for `key` at tick `now`; True on hit.

        With insert=False a miss is counted but the key is not admitted, so
        the caller can insert it later (e.g. once the content has arrived).
        """
        entry = self.entries.get(key)
        if entry is not None:
            entry.hit_count = 1.0 + self._factor(now - entry.last_update) * entry.hit_count
            entry.last_update = now
            self.hits += 1
            return True
        self.misses += 1
        if insert:
            self.insert(key, now)
        return False

    def insert(self, key, now: int):
        """Admit `key` with score 1, evicting first if full.

        Returns the evicted key, or None. A resident key is left alone.
        """
        if key in self.entries:
            return None
        victim = self.evict_victim(now) if self.full else None
        self.entries[key] = CacheEntry(key, 1.0, now)
        return victim

    def victim_key(self, now: int):
        """Key that evict_victim would remove, without removing it.

        Lowest decayed score; ties go to the older last_update, then the
        smaller key.
        """
        lam = self.lam
        best = None
        for e in self.entries.values():
            rank = (e.hit_count * 2.0 ** (-lam * (now - e.last_update)), e.last_update, e.key)
            if best is None or rank < best:
                best = rank
        return best[2]

    def evict_victim(self, now: int):
        if not self.full:
            raise CacheNotFullError(
                f"eviction requested with {len(self.entries)}/{self.capacity} entries"
            )
        key = self.victim_key(now)
        del self.entries[key]
        return key

    def hit_ratio(self) -> float:
        total = self.hits + self.misses
        if total == 0:
            raise UndefinedRatioError("no references processed yet")
        return self.hits / total

    def snapshot(self, now: int) -> dict:
        """{key: decayed score} for every resident entry."""
        return {k: self.decayed_count(k, now) for k in self.entries}


def hit_ratio(cache: LrfuCache) -> float:
    return cache.hit_ratio()


def read_trace(lines: Iterable[str]) -> list[Tuple[int, str]]:
    """Parse a `tick,key` reference trace; blank lines and '#' comments are skipped."""
    trace = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tick, sep, key = line.partition(",")
        if not sep or not key.strip():
            raise ValueError(f"line {lineno}: expected 'tick,key', got {raw!r}")
        trace.append((int(tick), key.strip()))
    return trace


def write_trace(trace: Iterable[Tuple[int, Hashable]]) -> str:
    return "".join(f"{tick},{key}\n" for tick, key in trace)


def replay(cache: LrfuCache, trace: Iterable[Tuple[int, Hashable]]) -> list[bool]:
    return [cache.reference(key, tick) for tick, key in trace]

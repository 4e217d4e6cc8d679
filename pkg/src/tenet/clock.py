"""Injectable clock. All timestamps are integer seconds since the Unix epoch."""

from __future__ import annotations

import threading
import time


class Clock:
    def now(self) -> int:
        raise NotImplementedError


class SystemClock(Clock):
    """Wall clock, clamped so now() never goes backwards within a process."""

    def __init__(self) -> None:
        self._last = 0
        self._lock = threading.Lock()

    def now(self) -> int:
        with self._lock:
            t = int(time.time())
            if t < self._last:
                t = self._last
            self._last = t
            return t


class FakeClock(Clock):
    """Deterministic clock for expiry tests."""

    def __init__(self, start: int = 1_000_000_000) -> None:
        self._now = start

    def now(self) -> int:
        return self._now

    def set(self, value: int) -> None:
        if value < self._now:
            raise ValueError("clock cannot move backwards")
        self._now = value

    def advance(self, seconds: int) -> None:
        self.set(self._now + seconds)

"""Injected time sources so the daemons run identically on wall time or in tests."""

from __future__ import annotations

import time
from typing import Protocol


class Clock(Protocol):
    def now_ms(self) -> int: ...

    def sleep_until_ms(self, t_ms: int) -> None: ...


class SystemClock:
    """Monotonic wall clock anchored at construction (stream t=0)."""

    def __init__(self):
        self._anchor = time.monotonic()

    def now_ms(self) -> int:
        return int((time.monotonic() - self._anchor) * 1000)

    def sleep_until_ms(self, t_ms: int) -> None:
        remaining = t_ms / 1000.0 - (time.monotonic() - self._anchor)
        if remaining > 0:
            time.sleep(remaining)


class FakeClock:
    """Virtual clock: sleeping jumps straight to the target time."""

    def __init__(self, start_ms: int = 0):
        self._now = start_ms

    def now_ms(self) -> int:
        return self._now

    def sleep_until_ms(self, t_ms: int) -> None:
        self._now = max(self._now, t_ms)

    def advance_ms(self, delta_ms: int) -> None:
        self._now += delta_ms

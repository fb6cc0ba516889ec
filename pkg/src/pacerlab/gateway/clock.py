"""Injected time. Replay and headless runs use the virtual clock and finish
in milliseconds of wall time; live sessions use the wall clock."""

from __future__ import annotations

import asyncio
import time
from typing import Protocol


class Clock(Protocol):
    def now_ms(self) -> float: ...

    def sleep_ms(self, dt_ms: float) -> None: ...

    async def async_sleep_ms(self, dt_ms: float) -> None: ...


class VirtualClock:
    """Deterministic clock: time moves only when someone sleeps or advances."""

    def __init__(self, start_ms: float = 0.0):
        self._t = start_ms

    def now_ms(self) -> float:
        return self._t

    def advance_ms(self, dt_ms: float) -> None:
        if dt_ms < 0:
            raise ValueError("cannot advance backwards")
        self._t += dt_ms

    def sleep_ms(self, dt_ms: float) -> None:
        self.advance_ms(dt_ms)

    async def async_sleep_ms(self, dt_ms: float) -> None:
        self.advance_ms(dt_ms)
        # yield control so other coroutines interleave deterministically
        await asyncio.sleep(0)


class WallClock:
    def __init__(self):
        self._start = time.monotonic()

    def now_ms(self) -> float:
        return (time.monotonic() - self._start) * 1000.0

    def sleep_ms(self, dt_ms: float) -> None:
        if dt_ms > 0:
            time.sleep(dt_ms / 1000.0)

    async def async_sleep_ms(self, dt_ms: float) -> None:
        if dt_ms > 0:
            await asyncio.sleep(dt_ms / 1000.0)

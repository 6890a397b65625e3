"""Deterministic discrete-event timeline with integer-picosecond clock."""

from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass, field
from typing import Callable, Optional, TextIO

import numpy as np

PS_PER_S = 10**12


class SimulationError(RuntimeError):
    """An event action raised; the message names the failing event."""


@dataclass(order=True)
class Event:
    fire_time: int
    sequence: int
    action: Callable[[], None] = field(compare=False)
    tag: str = field(default="", compare=False)
    cancelled: bool = field(default=False, compare=False)

    def cancel(self):
        self.cancelled = True


class Timeline:
    """Event queue ordered by ``(fire_time, sequence)``.

    Events scheduled for the same instant run in insertion order. If
    ``trace`` is given, one ``fire_time<TAB>sequence<TAB>tag`` line is written
    per executed event.
    """

    def __init__(self, trace: Optional[TextIO] = None):
        self._queue: list[Event] = []
        self._now = 0
        self._seq = 0
        self.trace = trace
        self.executed = 0

    @property
    def now(self) -> int:
        return self._now

    def __len__(self):
        return len(self._queue)

    def schedule(self, delay: int, action: Callable[[], None], tag: str = "") -> Event:
        delay = int(delay)
        if delay < 0:
            raise ValueError(f"negative delay {delay}")
        return self.schedule_at(self._now + delay, action, tag)

    def schedule_at(self, time: int, action: Callable[[], None], tag: str = "") -> Event:
        time = int(time)
        if time < self._now:
            raise ValueError(f"cannot schedule at {time} < now {self._now}")
        ev = Event(time, self._seq, action, tag)
        self._seq += 1
        heapq.heappush(self._queue, ev)
        return ev

    def _dispatch(self, ev: Event):
        self._now = ev.fire_time
        if self.trace is not None:
            self.trace.write(f"{ev.fire_time}\t{ev.sequence}\t{ev.tag}\n")
        try:
            ev.action()
        except Exception as exc:
            raise SimulationError(
                f"event {ev.tag or ev.action!r} (t={ev.fire_time} ps, seq={ev.sequence}) failed: {exc}"
            ) from exc
        self.executed += 1

    def run_until(self, horizon: int) -> int:
        """Execute every event with ``fire_time <= horizon``; returns how many ran."""
        horizon = int(horizon)
        if horizon < self._now:
            raise ValueError(f"horizon {horizon} is before now {self._now}")
        count = 0
        while self._queue and self._queue[0].fire_time <= horizon:
            ev = heapq.heappop(self._queue)
            if ev.cancelled:
                continue
            self._dispatch(ev)
            count += 1
        self._now = horizon
        return count

    def run(self, max_events: Optional[int] = None) -> int:
        """Execute until the queue is empty (or ``max_events`` have run)."""
        count = 0
        while self._queue and (max_events is None or count < max_events):
            ev = heapq.heappop(self._queue)
            if ev.cancelled:
                continue
            self._dispatch(ev)
            count += 1
        return count


def seconds_to_ps(seconds: float) -> int:
    return int(round(seconds * PS_PER_S))


def _key_words(key: str) -> list[int]:
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=16).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


def derive_rng(seed: int, *keys: object) -> np.random.Generator:
    """Independent PCG64 stream for ``seed`` and a stable component path.

    Streams for different key paths do not depend on each other, so adding a
    component leaves every other component's draws untouched.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for key in keys:
        entropy.extend(_key_words(str(key)))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


class BufferedRng:
    """Generator wrapper serving scalar ``random()`` draws from a block buffer.

    Scalar calls on a numpy Generator are slow; event-heavy protocols draw
    many of them. Other methods fall through to the wrapped generator.
    """

    def __init__(self, rng: np.random.Generator, block: int = 4096):
        self.rng = rng
        self.block = block
        self._buf: list[float] = []
        self._i = 0

    def random(self) -> float:
        if self._i >= len(self._buf):
            self._buf = self.rng.random(self.block).tolist()
            self._i = 0
        u = self._buf[self._i]
        self._i += 1
        return u

    def __getattr__(self, name):
        return getattr(self.rng, name)

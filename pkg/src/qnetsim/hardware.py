"""Physical component models: memories, detectors, fibers and classical links.

Each model turns configured physical parameters into the probabilities and
picosecond delays that the protocols consume.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .kernel import PS_PER_S, seconds_to_ps

FIBER_SPEED = 2e8  # m/s


class ProtocolError(RuntimeError):
    """A component was driven out of protocol order."""


def _unit(name: str, value: float):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name}={value} outside [0, 1]")


def _nonneg(name: str, value: float):
    if not value >= 0.0:
        raise ValueError(f"{name}={value} must be >= 0")


@dataclass(frozen=True)
class MemoryParams:
    frequency: float = 80e6
    coherence_time: float = 1.0
    efficiency: float = 1.0
    fidelity: float = 1.0

    def __post_init__(self):
        _unit("efficiency", self.efficiency)
        _unit("fidelity", self.fidelity)
        if not self.coherence_time > 0:
            raise ValueError(f"coherence_time={self.coherence_time} must be > 0")
        if not self.frequency > 0:
            raise ValueError(f"frequency={self.frequency} must be > 0")

    @property
    def relaxation_wait(self) -> int:
        """Default relaxation wait between rounds: one emission period, in ps."""
        return max(1, math.ceil(PS_PER_S / self.frequency))


@dataclass(frozen=True)
class DetectorParams:
    efficiency: float = 1.0
    dark_count_rate: float = 0.0
    time_resolution: float = 1e-9
    max_count_rate: float = 50e6

    def __post_init__(self):
        _unit("efficiency", self.efficiency)
        _nonneg("dark_count_rate", self.dark_count_rate)
        _nonneg("time_resolution", self.time_resolution)
        _nonneg("max_count_rate", self.max_count_rate)

    @cached_property
    def dead_time(self) -> int:
        """Dead time in ps; zero when the count rate is unbounded."""
        if self.max_count_rate == 0 or math.isinf(self.max_count_rate):
            return 0
        return seconds_to_ps(1.0 / self.max_count_rate)

    @cached_property
    def resolution_ps(self) -> int:
        return seconds_to_ps(self.time_resolution)


@dataclass(frozen=True)
class QuantumChannelParams:
    length: float = 0.0
    attenuation: float = 0.2
    propagation_speed: float = FIBER_SPEED

    def __post_init__(self):
        _nonneg("length", self.length)
        _nonneg("attenuation", self.attenuation)
        if not self.propagation_speed > 0:
            raise ValueError("propagation_speed must be > 0")

    @property
    def delay(self) -> int:
        return propagation_delay(self.length, self.propagation_speed)


@dataclass(frozen=True)
class ClassicalChannelParams:
    length: float = 0.0
    propagation_speed: float = FIBER_SPEED

    def __post_init__(self):
        _nonneg("length", self.length)
        if not self.propagation_speed > 0:
            raise ValueError("propagation_speed must be > 0")

    @property
    def delay(self) -> int:
        return propagation_delay(self.length, self.propagation_speed)


class Spin(enum.Enum):
    UP = "up"
    DOWN = "down"
    PLUS = "plus"
    EXCITED = "excited"


@dataclass
class MemoryState:
    spin: Spin = Spin.UP
    entangled_with: Optional[int] = None


class Click(NamedTuple):
    time: int
    dark: bool


def transmission_probability(ch: QuantumChannelParams) -> float:
    return 10 ** (-(ch.attenuation * ch.length / 1000) / 10)


def propagation_delay(length: float, speed: float = FIBER_SPEED) -> int:
    if not speed > 0:
        raise ValueError("speed must be > 0")
    return seconds_to_ps(length / speed)


def dark_click_probability(det: DetectorParams, window: float) -> float:
    """Probability of at least one dark count in ``window`` seconds."""
    _nonneg("window", window)
    return -math.expm1(-det.dark_count_rate * window)


def detect(
    det: DetectorParams,
    arrivals: Sequence[int],
    window: tuple[int, int],
    rng: np.random.Generator,
) -> list[Click]:
    """Clicks registered by one detector during ``window = (start, end)`` ps.

    Each arrival registers with probability ``efficiency``. Dark counts form a
    Poisson process over the window, placed uniformly in ``(start, end]``.
    Photons arriving at the same instant are resolved as a multi-photon
    detection; a click later than a previous one by less than the dead time is
    dropped. Reported times are floored to the time-resolution grid.
    """
    start, end = window
    times = [(t, False) for t in arrivals if det.efficiency >= 1.0 or rng.random() < det.efficiency]
    if det.dark_count_rate > 0 and end > start:
        n_dark = rng.poisson(det.dark_count_rate * (end - start) / PS_PER_S)
        if n_dark:
            times.extend((int(t), True) for t in rng.integers(start + 1, end + 1, size=n_dark))
    times.sort()
    dead = det.dead_time
    res = det.resolution_ps
    clicks: list[Click] = []
    last = None
    for t, dark in times:
        if last is not None and 0 < t - last < dead:
            continue
        last = t
        clicks.append(Click((t // res) * res if res > 1 else t, dark))
    return clicks


def excite_and_emit(mem: MemoryParams, spin: Spin, rng: np.random.Generator) -> bool:
    """Optical pi pulse on a memory with a definite spin; True if a photon leaves.

    Only the ``DOWN`` population is pumped, and it emits with probability
    ``efficiency``. Superposed spins must be resolved into branches by the
    caller before pulsing.
    """
    if spin is Spin.UP:
        return False
    if spin is Spin.DOWN:
        return mem.efficiency >= 1.0 or rng.random() < mem.efficiency
    raise ProtocolError(f"cannot apply a pi pulse to a memory in state {spin.value}")


def decay_pair(rho: np.ndarray, dt: int, coherence_time: float) -> np.ndarray:
    """Age a stored pair by ``dt`` ps: the Werner weight shrinks by exp(-dt/T)."""
    if dt <= 0:
        return rho
    keep = math.exp(-dt / PS_PER_S / coherence_time)
    dim = rho.shape[0]
    return keep * rho + (1 - keep) * np.eye(dim, dtype=complex) / dim

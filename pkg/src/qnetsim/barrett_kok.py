"""Two-round double-heralded entanglement generation between two memories.

Both memories start in ``|+>``. Each round pulses the memories, routes the
emitted photons through a 50:50 beamsplitter onto two detectors and asks for
exactly one click. Between rounds both spins are flipped. One click per round
on the same detector heralds psi+, on different detectors psi-.

The optics are simulated at branch level: the ``|+>|+>`` preparation is
expanded into the four spin branches and only the click statistics of the
beamsplitter are modelled (a lone photon picks a detector at random, two
indistinguishable photons bunch onto the same detector).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple, Optional

import numpy as np

from .hardware import (
    ClassicalChannelParams,
    DetectorParams,
    MemoryParams,
    MemoryState,
    ProtocolError,
    QuantumChannelParams,
    Spin,
    decay_pair,
    detect,
    excite_and_emit,
    propagation_delay,
    transmission_probability,
)
from .kernel import BufferedRng, Timeline
from .quantum import BellKind, werner_from_fidelity

DEFAULT_MAX_ATTEMPTS = 1000

FAILURE_REASONS = ("zero-clicks-r1", "multi-click-r1", "zero-clicks-r2", "multi-click-r2")

_FLIP = {"up": "down", "down": "up"}


class NotEntangled(RuntimeError):
    def __init__(self, attempts: int, failures: dict[str, int], pair: Optional[int] = None):
        self.attempts = attempts
        self.failures = dict(failures)
        self.pair = pair
        where = f"pair {pair}: " if pair is not None else ""
        super().__init__(f"{where}no entanglement after {attempts} attempts (failures: {self.failures})")


class Verdict(NamedTuple):
    sign: Optional[BellKind]
    reason: Optional[str]

    @property
    def success(self) -> bool:
        return self.sign is not None


@dataclass(frozen=True)
class AttemptOutcome:
    round1_clicks: tuple[int, int]
    round2_clicks: Optional[tuple[int, int]]
    verdict: Verdict
    genuine: bool = False


@dataclass(frozen=True)
class BranchState:
    """Spin branch of the pair, e.g. ``"up-down"`` (memory a up, b down).

    ``coherent`` marks the single-excitation branch after a photon-heralded
    round, i.e. the pair is in a psi state rather than a classical mixture.
    """

    label: str
    coherent: bool = False

    @property
    def spins(self) -> tuple[str, str]:
        a, b = self.label.split("-")
        return a, b

    @property
    def excitations(self) -> int:
        return self.spins.count("down")

    def flipped(self) -> "BranchState":
        a, b = self.spins
        return BranchState(f"{_FLIP[a]}-{_FLIP[b]}", self.coherent)


BRANCHES = ("up-up", "up-down", "down-up", "down-down")


@dataclass
class EntanglementRecord:
    memory_a: int
    memory_b: int
    completion_time: int
    sign: BellKind
    attempts: int
    round1_count: int
    round2_count: int
    fidelity: float
    state: np.ndarray = field(repr=False)
    genuine: bool = True


@dataclass(frozen=True)
class LinkHardware:
    """Hardware of one elementary link: two memories, two fiber arms, one BSM node."""

    memory_a: MemoryParams = MemoryParams()
    memory_b: MemoryParams = MemoryParams()
    detector: DetectorParams = DetectorParams()
    channel_a: QuantumChannelParams = QuantumChannelParams()
    channel_b: QuantumChannelParams = QuantumChannelParams()
    classical: ClassicalChannelParams = ClassicalChannelParams()
    relaxation_wait: Optional[int] = None

    @property
    def t2(self) -> int:
        if self.relaxation_wait is not None:
            return int(self.relaxation_wait)
        return max(self.memory_a.relaxation_wait, self.memory_b.relaxation_wait)

    @property
    def window(self) -> int:
        return max(1, self.detector.resolution_ps)

    @property
    def herald_delay(self) -> int:
        """BSM node to memory notification time."""
        return propagation_delay(self.channel_a.length, self.classical.propagation_speed)

    @property
    def pair_fidelity(self) -> float:
        return math.sqrt(self.memory_a.fidelity * self.memory_b.fidelity)

    def survival(self, side: int) -> float:
        """End-to-end photon survival ``eta_mem * T_channel * eta_det`` for one arm."""
        mem, ch = (self.memory_a, self.channel_a) if side == 0 else (self.memory_b, self.channel_b)
        return mem.efficiency * transmission_probability(ch) * self.detector.efficiency


def classify(
    round1_clicks: tuple[int, int], round2_clicks: Optional[tuple[int, int]]
) -> Verdict:
    """Herald verdict from per-detector click counts of both rounds."""
    if sum(round1_clicks) == 0:
        return Verdict(None, "zero-clicks-r1")
    if sum(round1_clicks) > 1:
        return Verdict(None, "multi-click-r1")
    if round2_clicks is None or sum(round2_clicks) == 0:
        return Verdict(None, "zero-clicks-r2")
    if sum(round2_clicks) > 1:
        return Verdict(None, "multi-click-r2")
    same = round1_clicks.index(1) == round2_clicks.index(1)
    return Verdict(BellKind.PSI_PLUS if same else BellKind.PSI_MINUS, None)


def success_probability_oracle(q: float, dark_window_prob: float = 0.0) -> float:
    """Exact per-attempt herald probability for symmetric arms.

    ``q`` is the end-to-end survival of one photon and ``dark_window_prob``
    the chance that a detector fires at least once from dark counts within a
    heralding window. Assumes the dead time covers the window (a detector
    registers at most one click besides simultaneous photons).
    """
    return sum(_oracle_terms(q, dark_window_prob))


def genuine_success_probability(q: float, dark_window_prob: float = 0.0) -> float:
    """Part of :func:`success_probability_oracle` heralded by real photons only."""
    return _oracle_terms(q, dark_window_prob)[0]


def _oracle_terms(q: float, d: float) -> tuple[float, float]:
    nd = 1 - d
    one_dark = 2 * d * nd  # exactly one of the two detectors fires
    single = q * nd  # one photon, the other detector stays quiet
    # round 2 outcome probabilities by number of emitters after the flip
    r2 = {0: one_dark, 1: single + (1 - q) * one_dark, 2: 2 * q * (1 - q) * nd + (1 - q) ** 2 * one_dark}
    genuine = 0.5 * single * single
    false = 0.5 * (1 - q) * one_dark * r2[1]  # single emitter lost, dark herald
    false += 0.5 * single * (1 - q) * one_dark  # real round-1 photon, round-2 photon lost
    false += 0.25 * one_dark * r2[2]  # up-up: dark herald, then two emitters
    false += 0.25 * (2 * q * (1 - q) * nd + (1 - q) ** 2 * one_dark) * r2[0]  # down-down
    return genuine, false


class BarrettKokLink:
    """Protocol instance for one memory pair driven by a :class:`Timeline`.

    Every attempt occupies a fixed time slot: round 1, the relaxation wait,
    round 2, the herald notification and the re-preparation cost. Round 2 is
    only run when round 1 heralded. On success ``record`` is set and
    ``on_entangled`` (if any) is called with it.
    """

    def __init__(
        self,
        hw: LinkHardware,
        timeline: Timeline,
        rng: np.random.Generator,
        memory_a: int = 0,
        memory_b: int = 1,
        max_attempts: int = DEFAULT_MAX_ATTEMPTS,
        on_entangled: Optional[Callable[[EntanglementRecord], None]] = None,
    ):
        if max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        t1a, t1b = hw.channel_a.delay, hw.channel_b.delay
        if t1a != t1b:
            raise ProtocolError(
                f"photons from the two arms reach the beamsplitter at different times ({t1a} vs {t1b} ps)"
            )
        self.hw = hw
        self.timeline = timeline
        self.rng = rng if isinstance(rng, BufferedRng) else BufferedRng(rng)
        self.memory_a = memory_a
        self.memory_b = memory_b
        self.max_attempts = max_attempts
        self.on_entangled = on_entangled
        self.states = (MemoryState(), MemoryState())
        self._transmit = (transmission_probability(hw.channel_a), transmission_probability(hw.channel_b))

        self.t1 = t1a
        self._states = {}
        w, tc, t2 = hw.window, hw.herald_delay, hw.t2
        self.window = w
        self.round2_offset = max(t2, self.t1 + w + tc)
        self.completion_offset = self.round2_offset + self.t1 + w + tc
        self.slot = self.completion_offset + t2 + 2 * tc

        self.branch: Optional[BranchState] = None
        self.record: Optional[EntanglementRecord] = None
        self.error: Optional[NotEntangled] = None
        self.outcomes: list[AttemptOutcome] = []
        self.keep_outcomes = False
        self._reset_counters()

    def _reset_counters(self):
        self.attempts = 0
        self.round1_count = 0
        self.round2_count = 0
        self.failures = {r: 0 for r in FAILURE_REASONS}

    # -- photon-level round --------------------------------------------

    def _set_spins(self, branch: BranchState):
        for state, spin in zip(self.states, branch.spins):
            state.spin = Spin.DOWN if spin == "down" else Spin.UP

    def run_round(self, round_index: int, start: Optional[int] = None) -> tuple[tuple[int, int], bool]:
        """Pulse both memories in the current branch and detect.

        Returns per-detector click counts and whether every registered click
        came from a real photon.
        """
        if self.branch is None:
            raise ProtocolError(f"round {round_index} run before preparation")
        hw, rng = self.hw, self.rng
        start = self.timeline.now if start is None else start
        self._set_spins(self.branch)
        photons = 0
        for side, (state, mem) in enumerate(zip(self.states, (hw.memory_a, hw.memory_b))):
            emitted = excite_and_emit(mem, state.spin, rng)
            if emitted:
                state.spin = Spin.EXCITED
                transmit = self._transmit[side]
                if transmit >= 1.0 or rng.random() < transmit:
                    photons += 1
        for state, spin in zip(self.states, self.branch.spins):
            state.spin = Spin.DOWN if spin == "down" else Spin.UP  # relaxed
        arrival = start + self.t1
        window = (arrival, arrival + self.window)
        arrivals: tuple[list[int], list[int]] = ([], [])
        if photons:
            # one photon: random output port; two: bunched on one port
            arrivals[rng.random() < 0.5].extend([arrival] * photons)
        counts = []
        real = True
        for port in (0, 1):
            clicks = detect(hw.detector, arrivals[port], window, rng)
            counts.append(len(clicks))
            real = real and not any(c.dark for c in clicks)
        return (counts[0], counts[1]), real

    # -- timeline-driven attempt loop ------------------------------------

    def start(self):
        self.record = None
        self.error = None
        self._reset_counters()
        for state in self.states:
            state.entangled_with = None
        self.timeline.schedule(0, self._begin_attempt, "bk.round1")

    def _begin_attempt(self):
        self.attempts += 1
        self._attempt_start = self.timeline.now
        for state in self.states:
            state.spin = Spin.PLUS
        self.branch = BranchState(BRANCHES[int(4 * self.rng.random())])
        self.round1_count += 1
        counts, real = self.run_round(1)
        self._round1 = counts
        ok = sum(counts) == 1
        if ok:
            self.branch = BranchState(self.branch.label, self.branch.excitations == 1 and real)
            self.timeline.schedule_at(self._attempt_start + self.round2_offset, self._round2, "bk.round2")
        else:
            self._fail(classify(counts, None), None)

    def _round2(self):
        # X on both memories after relaxation
        self.branch = self.branch.flipped()
        self.round2_count += 1
        counts, real = self.run_round(2)
        verdict = classify(self._round1, counts)
        if not verdict.success:
            self._fail(verdict, counts)
            return
        genuine = self.branch.coherent and real
        outcome = AttemptOutcome(self._round1, counts, verdict, genuine)
        if self.keep_outcomes:
            self.outcomes.append(outcome)
        self.timeline.schedule_at(
            self._attempt_start + self.completion_offset, lambda: self._herald(outcome), "bk.herald"
        )

    def _fail(self, verdict: Verdict, round2: Optional[tuple[int, int]]):
        self.failures[verdict.reason] += 1
        if self.keep_outcomes:
            self.outcomes.append(AttemptOutcome(self._round1, round2, verdict))
        if self.attempts >= self.max_attempts:
            self.error = NotEntangled(self.attempts, self.failures)
            return
        self.timeline.schedule_at(self._attempt_start + self.slot, self._begin_attempt, "bk.round1")

    def _herald(self, outcome: AttemptOutcome):
        sign = outcome.verdict.sign
        fidelity = self.hw.pair_fidelity if outcome.genuine else 0.25
        key = (fidelity, sign)
        state = self._states.get(key)
        if state is None:
            state = werner_from_fidelity(fidelity, sign)
            state.setflags(write=False)
            self._states[key] = state
        self.states[0].entangled_with = self.memory_b
        self.states[1].entangled_with = self.memory_a
        self.record = EntanglementRecord(
            memory_a=self.memory_a,
            memory_b=self.memory_b,
            completion_time=self.timeline.now,
            sign=sign,
            attempts=self.attempts,
            round1_count=self.round1_count,
            round2_count=self.round2_count,
            fidelity=fidelity,
            state=state,
            genuine=outcome.genuine,
        )
        if self.on_entangled is not None:
            self.on_entangled(self.record)


def run_until_entangled(
    hw: LinkHardware,
    timeline: Timeline,
    rng: np.random.Generator,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    memory_a: int = 0,
    memory_b: int = 1,
) -> EntanglementRecord:
    link = BarrettKokLink(hw, timeline, rng, memory_a, memory_b, max_attempts)
    link.start()
    timeline.run()
    if link.record is None:
        raise link.error or NotEntangled(link.attempts, link.failures)
    return link.record


def run_attempts(
    hw: LinkHardware,
    n: int,
    rng: np.random.Generator,
    on_entangled: Optional[Callable[[EntanglementRecord], None]] = None,
) -> list[AttemptOutcome]:
    """Run ``n`` independent attempts back to back and return every outcome.

    ``on_entangled`` sees the record of every successful attempt.
    """
    timeline = Timeline()
    link = BarrettKokLink(hw, timeline, rng, max_attempts=n, on_entangled=on_entangled)
    link.keep_outcomes = True
    done = 0
    while done < n:
        link.max_attempts = n - done
        link.start()
        timeline.run()
        done += link.attempts
    return link.outcomes


class BarrettKokSource:
    """Endless supply of freshly heralded pairs for teleportation trials.

    Each pair is aged by ``storage_delay`` ps of memory decoherence before it
    is handed out, i.e. the time it waits between heralding and consumption.
    """

    def __init__(
        self,
        hw: LinkHardware,
        rng: np.random.Generator,
        storage_delay: int = 0,
        max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    ):
        self.hw = hw
        self.timeline = Timeline()
        self.link = BarrettKokLink(hw, self.timeline, rng, max_attempts=max_attempts)
        self.storage_delay = storage_delay
        self.coherence_time = min(hw.memory_a.coherence_time, hw.memory_b.coherence_time)
        self.produced = 0
        self._decayed: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def __iter__(self) -> Iterator[EntanglementRecord]:
        return self

    def __next__(self) -> EntanglementRecord:
        self.link.start()
        self.timeline.run()
        rec = self.link.record
        if rec is None:
            raise self.link.error
        self.produced += 1
        # heralded states are shared read-only arrays, so their decayed forms can be too
        hit = self._decayed.get(id(rec.state))
        if hit is None or hit[0] is not rec.state:
            hit = (rec.state, decay_pair(rec.state, self.storage_delay, self.coherence_time))
            self._decayed[id(rec.state)] = hit
        rec.state = hit[1]
        return rec

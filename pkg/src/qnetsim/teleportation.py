"""Noisy single-qubit teleportation over a heralded resource pair.

Register layout: qubit 0 holds the input, qubit 1 is Alice's half of the pair
and qubit 2 is Bob's half. Each noise point is a stochastic Pauli channel
applied right after its ideal gate; the correction-gate channels only act when
that gate is actually applied.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Optional

import numpy as np

from . import quantum as qc
from .quantum import BellKind, Gate, PauliNoise

# Bob's half is (I (x) P) applied to phi+, P = X^x Z^z up to phase
_FRAME = {
    BellKind.PHI_PLUS: (0, 0),
    BellKind.PHI_MINUS: (0, 1),
    BellKind.PSI_PLUS: (1, 0),
    BellKind.PSI_MINUS: (1, 1),
}


class ResourceExhausted(RuntimeError):
    def __init__(self, completed: int):
        self.completed = completed
        super().__init__(f"resource supply ran out after {completed} trials")


@dataclass(frozen=True)
class InputState:
    alpha: complex = 1.0
    beta: complex = 0.0

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {norm}, expected 1")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)

    @classmethod
    def zero(cls) -> "InputState":
        return cls(1.0, 0.0)

    @classmethod
    def plus(cls) -> "InputState":
        return cls(1 / math.sqrt(2), 1 / math.sqrt(2))


@dataclass(frozen=True)
class NoiseConfig:
    """Where noise enters the circuit.

    ``cnot`` acts independently on control and target after the CNOT, ``h``
    on the input qubit after the Hadamard, ``correction_x``/``correction_z``
    on Bob's qubit after each correction gate that is applied, and
    ``measurement_flip`` flips each of Alice's reported bits.
    """

    cnot: PauliNoise = PauliNoise()
    h: PauliNoise = PauliNoise()
    correction_x: PauliNoise = PauliNoise()
    correction_z: PauliNoise = PauliNoise()
    measurement_flip: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.measurement_flip <= 1.0:
            raise ValueError(f"measurement_flip={self.measurement_flip} outside [0, 1]")

    def bsm_only(self) -> "NoiseConfig":
        return NoiseConfig(cnot=self.cnot, h=self.h, measurement_flip=self.measurement_flip)

    def receiver_only(self) -> "NoiseConfig":
        return NoiseConfig(correction_x=self.correction_x, correction_z=self.correction_z)


class Resource(NamedTuple):
    state: np.ndarray
    sign: BellKind = BellKind.PSI_PLUS


@dataclass
class TeleportTrialResult:
    m1: int
    m2: int
    corrections: tuple[str, ...]
    output_fidelity: float
    receiver_bit: Optional[int] = None
    output_state: np.ndarray = field(default=None, repr=False)


@dataclass(frozen=True)
class TrialAggregate:
    n: int
    count_0: int
    count_1: int
    mean_fidelity: float
    std_error: float


def correction(m1: int, m2: int, sign: BellKind = BellKind.PSI_PLUS) -> tuple[str, ...]:
    """Gates Bob applies (in order) for reported bits ``(m1, m2)``."""
    fx, fz = _FRAME[sign]
    gates = []
    if m2 ^ fx:
        gates.append("X")
    if m1 ^ fz:
        gates.append("Z")
    return tuple(gates)


def joint_pauli_probabilities(noise: PauliNoise) -> np.ndarray:
    """4x4 table of (control, target) Pauli error probabilities after a CNOT.

    Entry ``[i, j]`` is the chance of Pauli ``i`` on the control and ``j`` on
    the target, in ``(I, X, Y, Z)`` order.
    """
    p = noise.probabilities
    return np.outer(p, p)


def _check_resource(resource: np.ndarray):
    if resource.shape != (4, 4):
        raise ValueError(f"resource must be a 4x4 density matrix, got shape {resource.shape}")


def _sample_pauli(noise: PauliNoise, rng) -> int:
    if noise.is_trivial:
        return 0
    return int(np.searchsorted(np.cumsum(noise.probabilities), rng.random(), side="right").clip(0, 3))


def _single_qubit(rho: np.ndarray, gate: str) -> np.ndarray:
    return qc.apply_gate(rho, Gate(gate, (0,)))


def teleport_once(
    input_state: InputState,
    resource: np.ndarray,
    noise: NoiseConfig,
    rng: np.random.Generator,
    sign: BellKind = BellKind.PSI_PLUS,
    measure_receiver: bool = True,
) -> TeleportTrialResult:
    """One teleportation trial with sampled Pauli errors and measurements."""
    _check_resource(resource)
    psi = input_state.vector
    rho = qc.tensor(qc.pure(psi), resource)
    rho = qc.apply_gate(rho, Gate("CNOT", (0, 1)))
    for q in (0, 1):
        k = _sample_pauli(noise.cnot, rng)
        if k:
            rho = qc.apply_unitary(rho, qc.embed(qc.PAULIS[k], q, 3))
    rho = qc.apply_gate(rho, Gate("H", (0,)))
    k = _sample_pauli(noise.h, rng)
    if k:
        rho = qc.apply_unitary(rho, qc.embed(qc.PAULIS[k], 0, 3))

    m1, rho = qc.measure_z(rho, 0, rng)
    m2, rho = qc.measure_z(rho, 1, rng)
    r1 = m1 ^ int(rng.random() < noise.measurement_flip)
    r2 = m2 ^ int(rng.random() < noise.measurement_flip)

    bob = qc.partial_trace(rho, [2])
    gates = correction(r1, r2, sign)
    for g in gates:
        bob = _single_qubit(bob, g)
        k = _sample_pauli(noise.correction_x if g == "X" else noise.correction_z, rng)
        if k:
            bob = qc.apply_unitary(bob, qc.PAULIS[k])
    fid = qc.fidelity_to_pure(bob, psi)
    bit = None
    if measure_receiver:
        bit, _ = qc.measure_z(bob, 0, rng)
    return TeleportTrialResult(m1, m2, gates, fid, bit, bob)


def exact_output_state(
    input_state: InputState,
    resource: np.ndarray,
    noise: NoiseConfig,
    sign: BellKind = BellKind.PSI_PLUS,
) -> np.ndarray:
    """Bob's trial-averaged state, with every noise point as its exact channel."""
    _check_resource(resource)
    rho = qc.tensor(qc.pure(input_state.vector), resource)
    rho = qc.apply_gate(rho, Gate("CNOT", (0, 1)))
    rho = qc.apply_pauli_channel(rho, noise.cnot, 0)
    rho = qc.apply_pauli_channel(rho, noise.cnot, 1)
    rho = qc.apply_gate(rho, Gate("H", (0,)))
    rho = qc.apply_pauli_channel(rho, noise.h, 0)

    f = noise.measurement_flip
    out = np.zeros((2, 2), dtype=complex)
    for m1, m2 in itertools.product((0, 1), repeat=2):
        proj = qc.z_projector(0, m1, 3) @ qc.z_projector(1, m2, 3)
        # unnormalized: carries the outcome probability
        bob = qc.partial_trace(proj @ rho @ proj, [2])
        for r1, r2 in itertools.product((0, 1), repeat=2):
            w = (f if r1 != m1 else 1 - f) * (f if r2 != m2 else 1 - f)
            if w == 0:
                continue
            b = bob
            for g in correction(r1, r2, sign):
                b = _single_qubit(b, g)
                b = qc.apply_pauli_channel(b, noise.correction_x if g == "X" else noise.correction_z, 0)
            out += w * b
    return out


def exact_teleport_channel(
    input_state: InputState,
    resource: np.ndarray,
    noise: NoiseConfig,
    sign: BellKind = BellKind.PSI_PLUS,
) -> float:
    """Exact trial-averaged output fidelity; no sampling involved."""
    return qc.fidelity_to_pure(exact_output_state(input_state, resource, noise, sign), input_state.vector)


def werner_closed_form(fidelity: float) -> float:
    """Teleportation fidelity through a Werner pair with ideal gates."""
    return (1 + 2 * fidelity) / 3


# -- vectorized trajectory sampler used by run_trials -------------------------

_CNOT3 = qc.cnot_unitary(3, 0, 1)
_H0 = qc.embed(qc.H, 0, 3)
_PAULI_Q0 = np.stack([qc.embed(p, 0, 3) for p in qc.PAULIS])
_PAULI_Q1 = np.stack([qc.embed(p, 1, 3) for p in qc.PAULIS])
_PAULI_2 = np.stack(qc.PAULIS)


def _draw_paulis(noise: PauliNoise, u: np.ndarray) -> np.ndarray:
    if noise.is_trivial:
        return np.zeros(u.shape, dtype=np.intp)
    return np.searchsorted(np.cumsum(noise.probabilities), u, side="right").clip(0, 3)


def _simulate_batch(
    psi: np.ndarray,
    states: np.ndarray,
    frames: np.ndarray,
    noise: NoiseConfig,
    rng: np.random.Generator,
    measure_receiver: bool,
) -> tuple[np.ndarray, np.ndarray]:
    n = states.shape[0]
    u = rng.random((n, 10))
    p_in = np.outer(psi, psi.conj())
    rho = (p_in[None, :, None, :, None] * states[:, None, :, None, :]).reshape(n, 8, 8)

    k0 = _draw_paulis(noise.cnot, u[:, 0])
    k1 = _draw_paulis(noise.cnot, u[:, 1])
    kh = _draw_paulis(noise.h, u[:, 2])
    circuit = _PAULI_Q0[kh] @ _H0 @ _PAULI_Q0[k0] @ _PAULI_Q1[k1] @ _CNOT3
    rho = circuit @ rho @ np.conj(np.swapaxes(circuit, 1, 2))

    blocks = rho.reshape(n, 4, 2, 4, 2)[:, np.arange(4), :, np.arange(4), :]  # (4, n, 2, 2)
    blocks = np.moveaxis(blocks, 0, 1)
    probs = np.clip(np.real(np.trace(blocks, axis1=2, axis2=3)), 0, None)
    cum = np.cumsum(probs, axis=1)
    outcome = (u[:, 3:4] * cum[:, -1:] >= cum[:, :-1]).sum(axis=1)
    m1, m2 = outcome >> 1, outcome & 1
    bob = blocks[np.arange(n), outcome] / probs[np.arange(n), outcome][:, None, None]

    r1 = m1 ^ (u[:, 4] < noise.measurement_flip)
    r2 = m2 ^ (u[:, 5] < noise.measurement_flip)
    apply_x = (r2 ^ frames[:, 0]).astype(bool)
    apply_z = (r1 ^ frames[:, 1]).astype(bool)
    nx = np.where(apply_x, _draw_paulis(noise.correction_x, u[:, 6]), 0)
    nz = np.where(apply_z, _draw_paulis(noise.correction_z, u[:, 7]), 0)
    fix = _PAULI_2[nz] @ _PAULI_2[np.where(apply_z, 3, 0)] @ _PAULI_2[nx] @ _PAULI_2[np.where(apply_x, 1, 0)]
    bob = fix @ bob @ np.conj(np.swapaxes(fix, 1, 2))

    fid = np.real(np.einsum("i,nij,j->n", psi.conj(), bob, psi))
    bits = (u[:, 8] < np.real(bob[:, 1, 1])).astype(np.int64) if measure_receiver else None
    return fid, bits


def fixed_resource(state: np.ndarray, sign: BellKind = BellKind.PSI_PLUS) -> Iterator[Resource]:
    """Endless supply of one fixed resource pair."""
    _check_resource(state)
    return itertools.repeat(Resource(state, sign))


def run_trials(
    n: int,
    input_state: InputState,
    resources: Iterable,
    noise: NoiseConfig,
    rng: np.random.Generator,
    measure_receiver: bool = True,
    batch_size: int = 4096,
) -> TrialAggregate:
    """Aggregate ``n`` independent teleportation trials.

    ``resources`` yields one pair per trial: anything with ``state`` and
    ``sign`` attributes (an :class:`EntanglementRecord` or :class:`Resource`).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    psi = input_state.vector
    supply = iter(resources)
    fids = np.empty(n)
    count_1 = 0
    done = 0
    while done < n:
        m = min(batch_size, n - done)
        states = np.empty((m, 4, 4), dtype=complex)
        frames = np.empty((m, 2), dtype=np.int64)
        for i in range(m):
            try:
                res = next(supply)
            except StopIteration:
                raise ResourceExhausted(done + i) from None
            _check_resource(res.state)
            states[i] = res.state
            frames[i] = _FRAME[res.sign]
        fid, bits = _simulate_batch(psi, states, frames, noise, rng, measure_receiver)
        fids[done : done + m] = fid
        if bits is not None:
            count_1 += int(bits.sum())
        done += m
    mean = float(fids.mean())
    se = float(fids.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    count_0 = n - count_1 if measure_receiver else 0
    return TrialAggregate(n, count_0, count_1, min(max(mean, 0.0), 1.0), se)

"""Dense density-matrix primitives for few-qubit states.

States are plain ``numpy`` complex arrays of shape ``(2**n, 2**n)``. Qubit 0
is the most significant tensor factor, so ``|q0 q1 q2>`` maps to row index
``4*q0 + 2*q1 + q2``. Spin convention: ``|up> == |0>``, ``|down> == |1>``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

ATOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULIS = (I2, X, Y, Z)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


class QuantumError(ValueError):
    """Invalid state, gate or argument."""


class BellKind(enum.Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"

    @property
    def vector(self) -> np.ndarray:
        s = 1 / np.sqrt(2)
        return {
            BellKind.PHI_PLUS: np.array([s, 0, 0, s], dtype=complex),
            BellKind.PHI_MINUS: np.array([s, 0, 0, -s], dtype=complex),
            BellKind.PSI_PLUS: np.array([0, s, s, 0], dtype=complex),
            BellKind.PSI_MINUS: np.array([0, s, -s, 0], dtype=complex),
        }[self]


_GATES = {"I": I2, "X": X, "Z": Z, "H": H}


@dataclass(frozen=True)
class Gate:
    """A named gate acting on ``targets`` (control first for CNOT)."""

    name: str
    targets: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if any(t < 0 for t in self.targets):
            raise QuantumError(f"negative qubit index in {self.targets}")
        if self.name == "CNOT":
            if len(self.targets) != 2:
                raise QuantumError("CNOT needs (control, target)")
            if self.targets[0] == self.targets[1]:
                raise QuantumError("CNOT control and target must differ")
        elif self.name in _GATES:
            if len(self.targets) != 1:
                raise QuantumError(f"{self.name} acts on exactly one qubit")
        else:
            raise QuantumError(f"unknown gate {self.name!r}")

    def unitary(self, n_qubits: int) -> np.ndarray:
        for t in self.targets:
            if not 0 <= t < n_qubits:
                raise QuantumError(f"qubit index {t} out of range for {n_qubits} qubits")
        if self.name == "CNOT":
            return cnot_unitary(n_qubits, *self.targets)
        return embed(_GATES[self.name], self.targets[0], n_qubits)


@dataclass(frozen=True)
class PauliNoise:
    """Stochastic Pauli channel with X, Y and Z error probabilities."""

    px: float = 0.0
    py: float = 0.0
    pz: float = 0.0

    def __post_init__(self):
        for name in ("px", "py", "pz"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise QuantumError(f"{name}={p} outside [0, 1]")
        if self.px + self.py + self.pz > 1.0 + 1e-12:
            raise QuantumError("px + py + pz must not exceed 1")

    @classmethod
    def bit_flip(cls, p: float) -> "PauliNoise":
        return cls(px=p)

    @classmethod
    def phase_flip(cls, p: float) -> "PauliNoise":
        return cls(pz=p)

    @property
    def probabilities(self) -> np.ndarray:
        """Probabilities of applying ``(I, X, Y, Z)``."""
        return np.array([1.0 - self.px - self.py - self.pz, self.px, self.py, self.pz])

    @property
    def is_trivial(self) -> bool:
        return self.px == 0.0 and self.py == 0.0 and self.pz == 0.0


def n_qubits_of(rho: np.ndarray) -> int:
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if rho.ndim != 2 or rho.shape[1] != dim or dim != 1 << n or n < 1:
        raise QuantumError(f"not a qubit density matrix: shape {rho.shape}")
    return n


def is_density_matrix(rho: np.ndarray, atol: float = ATOL) -> bool:
    try:
        n_qubits_of(rho)
    except QuantumError:
        return False
    if abs(np.trace(rho) - 1.0) > atol:
        return False
    if not np.allclose(rho, rho.conj().T, atol=atol, rtol=0):
        return False
    return bool(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() >= -atol)


def check_density_matrix(rho: np.ndarray, atol: float = ATOL) -> np.ndarray:
    if not is_density_matrix(rho, atol):
        raise QuantumError("matrix is not a normalized Hermitian PSD density matrix")
    return rho


def pure(psi: Sequence[complex]) -> np.ndarray:
    """Projector onto a (normalized) state vector."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def tensor(*ops: np.ndarray) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def embed(op: np.ndarray, target: int, n_qubits: int) -> np.ndarray:
    """Lift a single-qubit operator onto ``target`` of an ``n_qubits`` register."""
    factors = [I2] * n_qubits
    factors[target] = op
    return tensor(*factors)


def cnot_unitary(n_qubits: int, control: int, target: int) -> np.ndarray:
    dim = 1 << n_qubits
    u = np.zeros((dim, dim), dtype=complex)
    cbit = 1 << (n_qubits - 1 - control)
    tbit = 1 << (n_qubits - 1 - target)
    for i in range(dim):
        u[i ^ tbit if i & cbit else i, i] = 1
    return u


def bell_state(kind: BellKind) -> np.ndarray:
    return pure(kind.vector)


def werner_from_fidelity(fidelity: float, kind: BellKind = BellKind.PSI_PLUS) -> np.ndarray:
    """Werner state whose overlap with the ``kind`` Bell state equals ``fidelity``.

    The state is ``p |B><B| + (1 - p) I/4`` with ``p = (4F - 1)/3``; it only
    exists for ``0.25 <= F <= 1``.
    """
    if not 0.25 - 1e-12 <= fidelity <= 1.0 + 1e-12:
        raise QuantumError(f"Werner fidelity {fidelity} outside [0.25, 1]")
    p = (4 * fidelity - 1) / 3
    return p * bell_state(kind) + (1 - p) * np.eye(4, dtype=complex) / 4


def werner_parameter(fidelity: float) -> float:
    return (4 * fidelity - 1) / 3


def apply_unitary(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    return u @ rho @ u.conj().T


def apply_gate(rho: np.ndarray, gate: Gate) -> np.ndarray:
    return apply_unitary(rho, gate.unitary(n_qubits_of(rho)))


def apply_pauli_channel(rho: np.ndarray, noise: PauliNoise, target: int) -> np.ndarray:
    n = n_qubits_of(rho)
    if not 0 <= target < n:
        raise QuantumError(f"qubit index {target} out of range for {n} qubits")
    if noise.is_trivial:
        return rho.copy()
    out = np.zeros_like(rho)
    for p, pauli in zip(noise.probabilities, PAULIS):
        if p:
            out += p * apply_unitary(rho, embed(pauli, target, n))
    return out


def z_projector(target: int, bit: int, n_qubits: int) -> np.ndarray:
    return embed(pure(KET1 if bit else KET0), target, n_qubits)


def measure_z(rho: np.ndarray, target: int, rng: np.random.Generator) -> tuple[int, np.ndarray]:
    """Computational-basis measurement of one qubit.

    Returns the sampled bit and the collapsed (renormalized) full-register
    state. Exactly one uniform draw is consumed.
    """
    n = n_qubits_of(rho)
    if not 0 <= target < n:
        raise QuantumError(f"qubit index {target} out of range for {n} qubits")
    # basis states whose target bit is 0
    mask = ((np.arange(1 << n) >> (n - 1 - target)) & 1) == 0
    diag = np.real(np.diagonal(rho))
    p0 = min(max(float(diag[mask].sum()), 0.0), 1.0)
    p1 = float(diag.sum()) - p0
    if p0 <= 0.0 and p1 <= 0.0:
        raise QuantumError("both measurement outcomes have zero probability")
    u = rng.random()
    bit = 0 if u < p0 / (p0 + p1) else 1
    keep = mask if bit == 0 else ~mask
    post = rho * np.outer(keep, keep)
    return bit, post / np.real(np.trace(post))


def fidelity_to_pure(rho: np.ndarray, psi: Sequence[complex]) -> float:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (rho.shape[0],):
        raise QuantumError(f"state of dimension {psi.shape} does not match {rho.shape}")
    return float(np.real(psi.conj() @ rho @ psi))


def partial_trace(rho: np.ndarray, keep: Iterable[int]) -> np.ndarray:
    """Reduced state on the qubits in ``keep`` (returned in ascending order)."""
    n = n_qubits_of(rho)
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise QuantumError("keep set must be non-empty")
    if keep[0] < 0 or keep[-1] >= n:
        raise QuantumError(f"keep set {keep} out of range for {n} qubits")
    traced = [q for q in range(n) if q not in keep]
    t = rho.reshape([2] * (2 * n))
    # trace highest index first so earlier axis numbers stay valid
    for q in sorted(traced, reverse=True):
        m = t.ndim // 2
        t = np.trace(t, axis1=q, axis2=q + m)
    d = 1 << len(keep)
    return t.reshape(d, d)

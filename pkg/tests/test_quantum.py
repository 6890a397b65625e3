import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from qnetsim import quantum as qc
from qnetsim.quantum import BellKind, Gate, PauliNoise


def ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def random_density(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    d = 2**n_qubits
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def assert_valid(rho):
    assert abs(np.trace(rho) - 1) < 1e-10
    assert np.allclose(rho, rho.conj().T, atol=1e-10)
    assert np.linalg.eigvalsh(rho).min() >= -1e-10


class TestBellStates:
    def test_psi_plus_entries(self):
        rho = qc.bell_state(BellKind.PSI_PLUS)
        assert rho[1, 1] == pytest.approx(0.5)
        assert rho[2, 2] == pytest.approx(0.5)
        assert rho[1, 2] == pytest.approx(0.5)
        assert abs(np.trace(rho) - 1) < 1e-12

    def test_phi_plus_is_projector(self):
        v = (ket("00") + ket("11")) / np.sqrt(2)
        assert np.allclose(qc.bell_state(BellKind.PHI_PLUS), np.outer(v, v.conj()))

    def test_psi_minus_orthogonal_to_psi_plus(self):
        psi_plus = (ket("01") + ket("10")) / np.sqrt(2)
        assert qc.fidelity_to_pure(qc.bell_state(BellKind.PSI_MINUS), psi_plus) == pytest.approx(0, abs=1e-12)

    def test_all_bell_states_orthonormal(self):
        vecs = np.array([k.vector for k in BellKind])
        assert np.allclose(vecs @ vecs.conj().T, np.eye(4))


class TestWerner:
    def test_unit_fidelity_is_pure(self):
        assert np.allclose(qc.werner_from_fidelity(1.0), qc.bell_state(BellKind.PSI_PLUS))

    def test_quarter_is_maximally_mixed(self):
        assert np.allclose(qc.werner_from_fidelity(0.25), np.eye(4) / 4)

    def test_087_by_explicit_construction(self):
        # independent oracle: write the 4x4 matrix out by hand
        p = (4 * 0.87 - 1) / 3
        assert p == pytest.approx(0.826667, abs=1e-6)
        psi = np.array([0, 1, 1, 0]) / np.sqrt(2)
        rho = np.zeros((4, 4))
        for i in range(4):
            for j in range(4):
                rho[i, j] = p * psi[i] * psi[j] + (1 - p) * (i == j) / 4
        overlap = sum(psi[i] * rho[i, j] * psi[j] for i in range(4) for j in range(4))
        assert overlap == pytest.approx(0.87, abs=1e-12)
        assert np.allclose(qc.werner_from_fidelity(0.87), rho, atol=1e-12)

    @pytest.mark.parametrize("f", [0.2, 1.01, -1.0])
    def test_out_of_range(self, f):
        with pytest.raises(qc.QuantumError):
            qc.werner_from_fidelity(f)

    @given(st.floats(0.25, 1.0), st.sampled_from(list(BellKind)))
    def test_overlap_equals_fidelity(self, f, kind):
        rho = qc.werner_from_fidelity(f, kind)
        assert qc.fidelity_to_pure(rho, kind.vector) == pytest.approx(f, abs=1e-10)
        assert_valid(rho)


class TestGates:
    def test_x_flips_zero(self):
        out = qc.apply_gate(qc.pure(qc.KET0), Gate("X", (0,)))
        assert np.allclose(out, qc.pure(qc.KET1))

    def test_h_makes_plus(self):
        out = qc.apply_gate(qc.pure(qc.KET0), Gate("H", (0,)))
        assert np.allclose(out, np.full((2, 2), 0.5))

    def test_cnot_builds_phi_plus(self):
        rho = qc.tensor(qc.pure(qc.KET_PLUS), qc.pure(qc.KET0))
        out = qc.apply_gate(rho, Gate("CNOT", (0, 1)))
        assert np.allclose(out, qc.bell_state(BellKind.PHI_PLUS))

    def test_cnot_against_truth_table(self):
        # control qubit 2, target qubit 0 of a 3-qubit register
        u = qc.cnot_unitary(3, 2, 0)
        for bits in itertools.product("01", repeat=3):
            b = list(bits)
            if b[2] == "1":
                b[0] = "1" if b[0] == "0" else "0"
            assert np.allclose(u @ ket("".join(bits)), ket("".join(b)))

    @pytest.mark.parametrize(
        "name,targets",
        [("CNOT", (0, 0)), ("CNOT", (0,)), ("X", (0, 1)), ("Y", (0,)), ("X", (-1,))],
    )
    def test_bad_gate_spec(self, name, targets):
        with pytest.raises(qc.QuantumError):
            Gate(name, targets)

    def test_target_out_of_range(self):
        with pytest.raises(qc.QuantumError):
            qc.apply_gate(qc.bell_state(BellKind.PSI_PLUS), Gate("X", (2,)))

    @pytest.mark.parametrize("name", ["I", "X", "Z", "H", "CNOT"])
    def test_unitary(self, name):
        g = Gate(name, (0, 1) if name == "CNOT" else (1,))
        u = g.unitary(3)
        assert np.allclose(u.conj().T @ u, np.eye(8), atol=1e-12)

    @given(st.sampled_from(["X", "Z", "H"]), st.integers(0, 2), st.integers(0, 2**32 - 1))
    def test_involutions(self, name, target, seed):
        rho = random_density(3, np.random.default_rng(seed))
        g = Gate(name, (target,))
        assert np.allclose(qc.apply_gate(qc.apply_gate(rho, g), g), rho, atol=1e-10)


class TestPauliChannel:
    def test_zero_noise_is_identity(self):
        rho = qc.werner_from_fidelity(0.8)
        assert np.allclose(qc.apply_pauli_channel(rho, PauliNoise(), 1), rho)

    def test_certain_flip(self):
        out = qc.apply_pauli_channel(qc.pure(qc.KET0), PauliNoise(1, 0, 0), 0)
        assert np.allclose(out, qc.pure(qc.KET1))

    def test_small_bit_flip(self):
        out = qc.apply_pauli_channel(qc.pure(qc.KET0), PauliNoise(0.018, 0, 0), 0)
        assert out[0, 0].real == pytest.approx(1 - 0.018, abs=1e-12)

    def test_constructors(self):
        assert PauliNoise.bit_flip(0.1) == PauliNoise(0.1, 0, 0)
        assert PauliNoise.phase_flip(0.2) == PauliNoise(0, 0, 0.2)

    @pytest.mark.parametrize("args", [(0.5, 0.5, 0.1), (-0.1, 0, 0), (0, 1.5, 0)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            PauliNoise(*args)

    def test_matches_kraus_sum(self):
        rng = np.random.default_rng(3)
        rho = random_density(2, rng)
        noise = PauliNoise(0.1, 0.2, 0.3)
        expected = 0.4 * rho
        for p, pauli in zip((0.1, 0.2, 0.3), (qc.X, qc.Y, qc.Z)):
            k = np.kron(np.eye(2), pauli)
            expected = expected + p * k @ rho @ k.conj().T
        assert np.allclose(qc.apply_pauli_channel(rho, noise, 1), expected)

    @given(
        st.floats(0, 0.33), st.floats(0, 0.33), st.floats(0, 0.33),
        st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**32 - 1),
    )
    def test_linear_on_hermitian_inputs(self, px, py, pz, a, b, seed):
        rng = np.random.default_rng(seed)
        noise = PauliNoise(px, py, pz)

        def herm():
            m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            return m + m.conj().T

        h1, h2 = herm(), herm()
        lhs = qc.apply_pauli_channel(a * h1 + b * h2, noise, 0)
        rhs = a * qc.apply_pauli_channel(h1, noise, 0) + b * qc.apply_pauli_channel(h2, noise, 0)
        assert np.allclose(lhs, rhs, atol=1e-9)


class TestMeasurement:
    def test_definite_zero(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            bit, post = qc.measure_z(qc.pure(qc.KET0), 0, rng)
            assert bit == 0
            assert np.allclose(post, qc.pure(qc.KET0))

    def test_psi_plus_anticorrelation(self):
        rng = np.random.default_rng(1)
        rho = qc.bell_state(BellKind.PSI_PLUS)
        for _ in range(50):
            bit, post = qc.measure_z(rho, 0, rng)
            other = qc.partial_trace(post, [1])
            expected = qc.pure(qc.KET1 if bit == 0 else qc.KET0)
            assert np.allclose(other, expected)

    def test_deterministic_given_rng(self):
        rho = qc.pure(qc.KET_PLUS)
        a = [qc.measure_z(rho, 0, np.random.default_rng(9))[0] for _ in range(5)]
        b = [qc.measure_z(rho, 0, np.random.default_rng(9))[0] for _ in range(5)]
        assert a == b

    def test_invalid_state(self):
        with pytest.raises(qc.QuantumError):
            qc.measure_z(np.zeros((2, 2), dtype=complex), 0, np.random.default_rng(0))

    @pytest.mark.parametrize("seed", [0, 1])
    def test_frequencies_match_born_rule(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density(2, rng)
        n = 100_000
        p1 = float(np.real(np.trace(qc.z_projector(1, 1, 2) @ rho)))
        ones = sum(qc.measure_z(rho, 1, rng)[0] for _ in range(n))
        sigma = np.sqrt(n * p1 * (1 - p1))
        assert abs(ones - n * p1) <= 3 * sigma

    def test_plus_state_half_half(self):
        rng = np.random.default_rng(5)
        n = 100_000
        ones = sum(qc.measure_z(qc.pure(qc.KET_PLUS), 0, rng)[0] for _ in range(n))
        assert stats.binomtest(ones, n, 0.5).pvalue > 0.0027


class TestFidelityAndTrace:
    def test_pure_self_fidelity(self):
        psi = np.array([0.6, 0.8j])
        assert qc.fidelity_to_pure(qc.pure(psi), psi) == pytest.approx(1)

    def test_mixed(self):
        assert qc.fidelity_to_pure(np.eye(2) / 2, qc.KET0) == pytest.approx(0.5)

    def test_werner_fidelity(self):
        rho = qc.werner_from_fidelity(0.87, BellKind.PSI_PLUS)
        assert qc.fidelity_to_pure(rho, BellKind.PSI_PLUS.vector) == pytest.approx(0.87, abs=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(qc.QuantumError):
            qc.fidelity_to_pure(np.eye(4) / 4, qc.KET0)

    def test_half_of_bell_is_mixed(self):
        assert np.allclose(qc.partial_trace(qc.bell_state(BellKind.PSI_PLUS), [0]), np.eye(2) / 2)

    def test_empty_keep(self):
        with pytest.raises(qc.QuantumError):
            qc.partial_trace(np.eye(4) / 4, [])

    @given(st.floats(0.25, 1.0), st.sampled_from([0, 1]))
    def test_werner_marginals_by_direct_summation(self, f, keep):
        rho = qc.werner_from_fidelity(f)
        # oracle: sum over the traced-out index explicitly
        r = rho.reshape(2, 2, 2, 2)
        oracle = np.zeros((2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    oracle[i, j] += r[i, k, j, k] if keep == 0 else r[k, i, k, j]
        assert np.allclose(qc.partial_trace(rho, [keep]), oracle, atol=1e-12)
        assert np.allclose(oracle, np.eye(2) / 2, atol=1e-12)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 2), st.integers(1, 2))
    def test_product_state(self, seed, na, nb):
        rng = np.random.default_rng(seed)
        ra, rb = random_density(na, rng), random_density(nb, rng)
        joint = qc.tensor(ra, rb)
        assert np.allclose(qc.partial_trace(joint, range(na)), ra, atol=1e-10)
        assert np.allclose(qc.partial_trace(joint, range(na, na + nb)), rb, atol=1e-10)


# randomised operation sequences on three qubits
_op = st.one_of(
    st.tuples(st.just("gate"), st.sampled_from(["I", "X", "Z", "H"]), st.integers(0, 2)),
    st.tuples(st.just("cnot"), st.permutations([0, 1, 2]).map(lambda p: (p[0], p[1]))),
    st.tuples(
        st.just("noise"),
        st.tuples(st.floats(0, 0.33), st.floats(0, 0.33), st.floats(0, 0.33)),
        st.integers(0, 2),
    ),
    st.tuples(st.just("measure"), st.integers(0, 2)),
)


class TestInvariants:
    @settings(max_examples=200, deadline=None)
    @given(st.lists(_op, max_size=20), st.integers(0, 2**32 - 1), st.floats(0.25, 1.0))
    def test_sequences_keep_density_matrix(self, ops, seed, f):
        rng = np.random.default_rng(seed)
        rho = qc.tensor(random_density(1, rng), qc.werner_from_fidelity(f))
        for op in ops:
            if op[0] == "gate":
                rho = qc.apply_gate(rho, Gate(op[1], (op[2],)))
            elif op[0] == "cnot":
                rho = qc.apply_gate(rho, Gate("CNOT", op[1]))
            elif op[0] == "noise":
                rho = qc.apply_pauli_channel(rho, PauliNoise(*op[1]), op[2])
            else:
                _, rho = qc.measure_z(rho, op[1], rng)
            assert_valid(rho)
            assert qc.is_density_matrix(rho)

import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ansatz_lab.errors import DimensionMismatch, DimensionTooLarge, IndexOutOfRange, MissingAngle, NotUnitary
from ansatz_lab.qsim import (
    CX_MATRIX,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    GateKind,
    apply_gate,
    basis_state,
    eigensolve,
    euler_compose,
    euler_zxz,
    gate_matrix,
    phase_distance,
    run_gates,
    rx,
    ry,
    rz,
    unitarity_error,
)

ANGLES = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


def embed(mat, q, n):
    """Dense oracle: ``mat`` on qubit ``q`` with the highest qubit as the left Kronecker factor."""
    factors = [mat if k == q else np.eye(2) for k in reversed(range(n))]
    return reduce(np.kron, factors)


def cx_dense(control, target, n):
    dim = 1 << n
    m = np.zeros((dim, dim))
    for x in range(dim):
        y = x ^ (((x >> control) & 1) << target)
        m[y, x] = 1
    return m


def haar_unitary(dim, rng):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestGateMatrices:
    @given(ANGLES)
    def test_rotations_match_exponentials(self, t):
        for mat, gen in ((rx(t), PAULI_X), (ry(t), PAULI_Y), (rz(t), PAULI_Z)):
            expected = math.cos(t / 2) * np.eye(2) - 1j * math.sin(t / 2) * gen
            np.testing.assert_allclose(mat, expected, atol=1e-14)

    @given(ANGLES, ANGLES)
    def test_rotations_compose_additively(self, a, b):
        for f in (rx, ry, rz):
            np.testing.assert_allclose(f(a) @ f(b), f(a + b), atol=1e-13)

    def test_cx_matrix_is_textbook_layout(self):
        np.testing.assert_array_equal(CX_MATRIX.real, cx_dense(1, 0, 2))

    def test_rotation_without_angle_rejected(self):
        with pytest.raises(MissingAngle):
            gate_matrix("RX")

    def test_x_matches_pauli(self):
        np.testing.assert_array_equal(gate_matrix("X"), PAULI_X)


class TestKernels:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_single_qubit_gate_matches_kron(self, n):
        rng = np.random.default_rng(n)
        psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        for q in range(n):
            for kind in (GateKind.RX, GateKind.RY, GateKind.RZ):
                t = rng.uniform(0, 2 * math.pi)
                got = apply_gate(psi, kind, (q,), t)
                np.testing.assert_allclose(got, embed(gate_matrix(kind, t), q, n) @ psi, atol=1e-13)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_cx_matches_dense_permutation(self, n):
        rng = np.random.default_rng(10 + n)
        psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        for c in range(n):
            for t in range(n):
                if c != t:
                    np.testing.assert_array_equal(apply_gate(psi, "CX", (c, t)), cx_dense(c, t, n) @ psi)

    def test_apply_gate_does_not_mutate_input(self):
        psi = basis_state(2, 1)
        before = psi.copy()
        apply_gate(psi, "RX", (0,), 0.3)
        np.testing.assert_array_equal(psi, before)

    def test_block_application_acts_per_column(self):
        rng = np.random.default_rng(0)
        u = haar_unitary(8, rng)
        gates = [(GateKind.RY, (2,), 0.4), (GateKind.CX, (2, 0), None), (GateKind.X, (1,), None)]
        dense = embed(PAULI_X, 1, 3) @ cx_dense(2, 0, 3) @ embed(ry(0.4), 2, 3)
        np.testing.assert_allclose(run_gates(u, gates), dense @ u, atol=1e-13)

    @pytest.mark.parametrize("qubits", [(3,), (-1,), (0, 0), (0, 1, 2)])
    def test_bad_qubits_rejected(self, qubits):
        kind = "CX" if len(qubits) != 1 else "RX"
        with pytest.raises(IndexOutOfRange):
            apply_gate(basis_state(3), kind, qubits, 0.1 if kind == "RX" else None)

    def test_non_power_of_two_rejected(self):
        with pytest.raises(DimensionMismatch):
            apply_gate(np.ones(3, dtype=complex), "X", (0,))


class TestPhaseDistance:
    def test_global_phase_ignored(self):
        u = haar_unitary(4, np.random.default_rng(1))
        assert phase_distance(u, np.exp(0.7j) * u) < 1e-12

    def test_matches_brute_force_minimum(self):
        rng = np.random.default_rng(2)
        u, v = haar_unitary(4, rng), haar_unitary(4, rng)
        phis = np.linspace(0, 2 * np.pi, 20001)
        brute = min(np.linalg.norm(u - np.exp(1j * p) * v) for p in phis)
        assert phase_distance(u, v) == pytest.approx(brute, abs=1e-6)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            phase_distance(np.eye(2), np.eye(4))


class TestEuler:
    @settings(max_examples=200)
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_round_trip_random_unitaries(self, seed):
        u = haar_unitary(2, np.random.default_rng(seed))
        a, b, g, ph = euler_zxz(u)
        assert 0 <= b <= math.pi
        np.testing.assert_allclose(euler_compose(a, b, g, ph), u, atol=1e-10)

    @pytest.mark.parametrize("u", [np.eye(2), PAULI_X, PAULI_Z, rz(1.0), rx(math.pi)])
    def test_round_trip_degenerate(self, u):
        np.testing.assert_allclose(euler_compose(*euler_zxz(u)), u, atol=1e-10)

    def test_non_unitary_rejected(self):
        with pytest.raises(NotUnitary):
            euler_zxz(np.array([[1, 1], [0, 1]]))


def power_iteration_extreme(h, iters=4000):
    """Largest-magnitude eigenvalue via power iteration on the shifted matrix."""
    shift = np.linalg.norm(h, 1)
    m = h + shift * np.eye(h.shape[0])
    v = np.ones(h.shape[0], dtype=complex)
    for _ in range(iters):
        v = m @ v
        v /= np.linalg.norm(v)
    return float(np.vdot(v, h @ v).real)


class TestEigensolve:
    @pytest.mark.parametrize("method", ["lapack", "jacobi"])
    @pytest.mark.parametrize("dim", [1, 2, 5, 16])
    def test_residual_and_orthonormality(self, method, dim):
        rng = np.random.default_rng(dim)
        z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = (z + z.conj().T) / 2
        w, v = eigensolve(h, method=method)
        assert np.all(np.diff(w) >= -1e-12)
        assert np.linalg.norm(h @ v - v * w) < 1e-8 * max(np.linalg.norm(h, 2), 1)
        assert unitarity_error(v) < 1e-8

    def test_methods_agree_and_match_power_iteration(self):
        rng = np.random.default_rng(7)
        z = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
        h = (z + z.conj().T) / 2
        w_l, _ = eigensolve(h)
        w_j, _ = eigensolve(h, method="jacobi")
        np.testing.assert_allclose(w_l, w_j, atol=1e-9)
        assert w_l[-1] == pytest.approx(power_iteration_extreme(h), abs=1e-6)

    def test_degenerate_spectrum(self):
        h = np.diag([1.0, 1.0, -2.0, 3.0]).astype(complex)
        w, v = eigensolve(h, method="jacobi")
        np.testing.assert_allclose(w, [-2, 1, 1, 3], atol=1e-12)
        assert unitarity_error(v) < 1e-10

    def test_too_large_rejected(self):
        with pytest.raises(DimensionTooLarge):
            eigensolve(np.zeros((4097, 4097)))

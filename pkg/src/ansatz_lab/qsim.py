"""Dense statevector / unitary simulation.

Bit convention (little-endian): qubit ``i`` contributes ``2**i`` to a basis
index. The two-qubit ``CX`` matrix printed in most textbooks,
``[[1,0,0,0],[0,1,0,0],[0,0,0,1],[0,0,1,0]]``, is ``CX(control=1, target=0)``
here. Every module in the package uses this convention.

Arrays are plain ``numpy`` complex arrays. Anything whose leading axis has
length ``2**n`` is accepted as a "state block": a single statevector has shape
``(2**n,)``, a unitary is a block of ``2**n`` columns.
"""
from __future__ import annotations

import enum
import math
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionTooLarge,
    IndexOutOfRange,
    MissingAngle,
    NotUnitary,
)

MAX_EIGEN_DIM = 2**12


class GateKind(str, enum.Enum):
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    X = "X"
    CX = "CX"

    @property
    def is_rotation(self) -> bool:
        return self in (GateKind.RX, GateKind.RY, GateKind.RZ)

    @property
    def arity(self) -> int:
        return 2 if self is GateKind.CX else 1


I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
GENERATORS = {GateKind.RX: PAULI_X, GateKind.RY: PAULI_Y, GateKind.RZ: PAULI_Z}

# CX(control=1, target=0) in the little-endian convention
CX_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex
    )


_ROTATIONS = {GateKind.RX: rx, GateKind.RY: ry, GateKind.RZ: rz}


def gate_matrix(kind: GateKind | str, angle: float | None = None) -> np.ndarray:
    """2x2 (or 4x4 for CX) matrix of a gate, CX in the (control=1, target=0) layout."""
    kind = GateKind(kind)
    if kind.is_rotation:
        if angle is None:
            raise MissingAngle(f"{kind.value} needs an angle")
        return _ROTATIONS[kind](float(angle))
    if kind is GateKind.X:
        return PAULI_X.copy()
    return CX_MATRIX.copy()


def n_qubits_of(arr: np.ndarray) -> int:
    dim = arr.shape[0]
    n = dim.bit_length() - 1
    if dim != 1 << n:
        raise DimensionMismatch(f"leading dimension {dim} is not a power of two")
    return n


def basis_state(n: int, index: int = 0) -> np.ndarray:
    psi = np.zeros(1 << n, dtype=complex)
    psi[index] = 1.0
    return psi


# -- kernels ---------------------------------------------------------------

def apply_1q(arr: np.ndarray, mat: np.ndarray, q: int) -> np.ndarray:
    """Return ``mat`` applied to qubit ``q`` of every column of ``arr``."""
    dim = arr.shape[0]
    rest = arr.shape[1:]
    v = arr.reshape(dim >> (q + 1), 2, 1 << q, -1)
    a0 = v[:, 0]
    a1 = v[:, 1]
    out = np.empty_like(v)
    out[:, 0] = mat[0, 0] * a0 + mat[0, 1] * a1
    out[:, 1] = mat[1, 0] * a0 + mat[1, 1] * a1
    return out.reshape((dim,) + rest)


@lru_cache(maxsize=256)
def _cx_perm(n: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return idx ^ (((idx >> control) & 1) << target)


def apply_cx(arr: np.ndarray, control: int, target: int) -> np.ndarray:
    n = n_qubits_of(arr)
    return arr[_cx_perm(n, control, target)]


def _check_qubits(kind: GateKind, qubits: Sequence[int], n: int) -> None:
    if len(qubits) != kind.arity:
        raise IndexOutOfRange(f"{kind.value} acts on {kind.arity} qubit(s), got {list(qubits)}")
    for q in qubits:
        if not 0 <= q < n:
            raise IndexOutOfRange(f"qubit {q} out of range for n={n}")
    if len(set(qubits)) != len(qubits):
        raise IndexOutOfRange(f"repeated qubit in {list(qubits)}")


def apply_gate(state: np.ndarray, kind: GateKind | str, qubits: Sequence[int],
               angle: float | None = None) -> np.ndarray:
    """Apply one gate and return the new state block (input is not modified)."""
    kind = GateKind(kind)
    n = n_qubits_of(state)
    _check_qubits(kind, qubits, n)
    if kind.is_rotation:
        if angle is None:
            raise MissingAngle(f"{kind.value} needs an angle")
        return apply_1q(state, _ROTATIONS[kind](float(angle)), qubits[0])
    if angle is not None:
        raise MissingAngle(f"{kind.value} takes no angle")
    if kind is GateKind.X:
        return apply_1q(state, PAULI_X, qubits[0])
    return apply_cx(state, qubits[0], qubits[1])


def run_gates(block: np.ndarray, bound: Iterable[tuple]) -> np.ndarray:
    """Apply bound gates ``(kind, qubits, angle)`` in time order to a state block."""
    out = block
    for kind, qubits, angle in bound:
        if kind is GateKind.CX:
            out = apply_cx(out, qubits[0], qubits[1])
        elif kind is GateKind.X:
            out = apply_1q(out, PAULI_X, qubits[0])
        else:
            out = apply_1q(out, _ROTATIONS[kind](angle), qubits[0])
    return out


def circuit_unitary(circuit, theta: Sequence[float]) -> np.ndarray:
    """Unitary of ``circuit`` at ``theta``; column ``x`` is the circuit applied to ``|x>``."""
    bound = circuit.bind(theta)
    return run_gates(np.eye(1 << circuit.n_qubits, dtype=complex), bound)


def circuit_state(circuit, theta: Sequence[float], initial: np.ndarray | None = None) -> np.ndarray:
    psi = basis_state(circuit.n_qubits) if initial is None else np.asarray(initial, dtype=complex)
    return run_gates(psi, circuit.bind(theta))


# -- comparisons -----------------------------------------------------------

def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """``min_phi ||u - exp(i phi) v||_F``, closed form through ``|tr(u^dag v)|``."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise DimensionMismatch(f"shapes {u.shape} and {v.shape} differ")
    overlap = abs(np.vdot(u, v))
    sq = np.vdot(u, u).real + np.vdot(v, v).real - 2.0 * overlap
    return math.sqrt(max(sq, 0.0))


def unitarity_error(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])))


# -- Euler decomposition ---------------------------------------------------

def _wrap(angle: float) -> float:
    a = math.remainder(angle, 2 * math.pi)
    return math.pi if a == -math.pi else a


def euler_zxz(u: np.ndarray, atol: float = 1e-9) -> tuple[float, float, float, float]:
    """Angles ``(alpha, beta, gamma, phase)`` with
    ``u = exp(i phase) RZ(gamma) RX(beta) RZ(alpha)`` and ``beta`` in ``[0, pi]``."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or unitarity_error(u) > atol:
        raise NotUnitary("euler_zxz expects a 2x2 unitary")
    v = u / np.sqrt(np.linalg.det(u))
    c, s = abs(v[0, 0]), abs(v[1, 0])
    beta = 2.0 * math.atan2(s, c)
    eps = 1e-12
    # gamma + alpha from the diagonal, gamma - alpha from the off-diagonal
    tot = 2.0 * float(np.angle(v[1, 1])) if c > eps else 0.0
    diff = 2.0 * (float(np.angle(v[1, 0])) + math.pi / 2) if s > eps else 0.0
    gamma, alpha = _wrap((tot + diff) / 2), _wrap((tot - diff) / 2)
    m = rz(gamma) @ rx(beta) @ rz(alpha)
    phase = _wrap(float(np.angle(np.trace(m.conj().T @ u))))
    return alpha, beta, gamma, phase


def euler_compose(alpha: float, beta: float, gamma: float, phase: float = 0.0) -> np.ndarray:
    return np.exp(1j * phase) * (rz(gamma) @ rx(beta) @ rz(alpha))


# -- Hermitian eigensolver -------------------------------------------------

def hermitian(h: np.ndarray) -> np.ndarray:
    """Symmetrized copy, ``(h + h^dag) / 2``."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {h.shape}")
    return 0.5 * (h + h.conj().T)


def jacobi_eigh_real(s: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Cyclic Jacobi diagonalization of a real symmetric matrix.

    Iterates until the off-diagonal Frobenius norm falls below ``tol * ||s||_F``.
    Returns unsorted eigenvalues and the orthogonal eigenvector matrix.
    """
    a = np.array(s, dtype=float)
    m = a.shape[0]
    v = np.eye(m)
    scale = np.linalg.norm(a) or 1.0
    for _ in range(max_sweeps):
        off = math.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= tol * scale:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                sn = t * c
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - sn * aq
                a[:, q] = sn * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :]
                a[p, :] = c * rp - sn * rq
                a[q, :] = sn * rp + c * rq
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - sn * vq
                v[:, q] = sn * vp + c * vq
    return np.diag(a).copy(), v


def _jacobi_eigh_complex(h: np.ndarray, tol: float):
    d = h.shape[0]
    re, im = h.real, h.imag
    big = np.block([[re, -im], [im, re]])
    w, vecs = jacobi_eigh_real(big, tol=tol)
    order = np.argsort(w)
    w, vecs = w[order], vecs[:, order]
    z = vecs[:d] + 1j * vecs[d:]
    # each complex eigenvalue appears twice; rebuild an orthonormal basis per cluster
    gap = 1e-8 * max(np.abs(w).max(), 1.0)
    values, vectors = [], []
    i = 0
    while i < 2 * d:
        j = i + 1
        while j < 2 * d and w[j] - w[j - 1] <= gap:
            j += 1
        k = (j - i) // 2
        u, _, _ = np.linalg.svd(z[:, i:j], full_matrices=False)
        values.extend([float(np.mean(w[i:j]))] * k)
        vectors.append(u[:, :k])
        i = j
    return np.array(values), np.hstack(vectors)


def eigensolve(h: np.ndarray, method: str = "lapack", tol: float = 1e-12):
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.

    ``method="lapack"`` uses ``numpy.linalg.eigh``; ``method="jacobi"`` runs the
    dependency-free cyclic Jacobi solver on the real ``2d x 2d`` embedding and
    is meant for small matrices.
    """
    h = hermitian(h)
    if h.shape[0] > MAX_EIGEN_DIM:
        raise DimensionTooLarge(f"dim {h.shape[0]} exceeds {MAX_EIGEN_DIM}")
    if method == "lapack":
        w, v = np.linalg.eigh(h)
    elif method == "jacobi":
        w, v = _jacobi_eigh_complex(h, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    order = np.argsort(w, kind="stable")
    return np.asarray(w)[order], np.asarray(v)[:, order]

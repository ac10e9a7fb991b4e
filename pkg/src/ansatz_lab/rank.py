"""Parameter Jacobians of circuits and their numerical rank."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Circuit
from .errors import EmptyMatrix, ValidationError
from .qsim import GENERATORS, GateKind, apply_1q, apply_cx, basis_state, gate_matrix

MODES = ("unitary", "state")
DEFAULT_REL_TOL = 1e-8
ABS_FLOOR = 1e-12  # singular values this small are rounding noise whatever sigma_max is
SUBSAMPLE_PARAMS = 200
SUBSAMPLE_QUBITS = 8


def _apply(arr: np.ndarray, kind: GateKind, qubits, angle, *, right: bool = False,
           inverse: bool = False) -> np.ndarray:
    """``G @ arr`` (or ``arr @ G`` with ``right=True``), optionally with ``G^-1``."""
    if kind is GateKind.CX:
        # CX is a symmetric involution
        return apply_cx(arr.T, *qubits).T if right else apply_cx(arr, *qubits)
    mat = gate_matrix(kind, angle)
    if inverse:
        mat = mat.conj().T
    if right:
        return apply_1q(arr.T, mat.T, qubits[0]).T
    return apply_1q(arr, mat, qubits[0])


def _gate_derivatives(c: Circuit, theta: Sequence[float], mode: str) -> tuple[list[int], list[np.ndarray]]:
    """Derivative of the output with respect to each rotation angle, gate by gate."""
    bound = c.bind(theta)
    dim = 1 << c.n_qubits
    # W: the circuit applied so far (gate g included); S: everything after g.
    w = np.eye(dim, dtype=complex) if mode == "unitary" else basis_state(c.n_qubits)
    for kind, qubits, angle in bound:
        w = _apply(w, kind, qubits, angle)
    s = np.eye(dim, dtype=complex)
    idx, ders = [], []
    for gi in range(len(bound) - 1, -1, -1):
        kind, qubits, angle = bound[gi]
        if kind.is_rotation:
            pw = apply_1q(w, GENERATORS[kind], qubits[0])
            ders.append(-0.5j * (s @ pw))
            idx.append(gi)
        w = _apply(w, kind, qubits, angle, inverse=True)
        s = _apply(s, kind, qubits, angle, right=True)
    return idx[::-1], ders[::-1]


def _output(c: Circuit, theta: Sequence[float], mode: str) -> np.ndarray:
    block = np.eye(1 << c.n_qubits, dtype=complex) if mode == "unitary" else basis_state(c.n_qubits)
    for kind, qubits, angle in c.bind(theta):
        block = _apply(block, kind, qubits, angle)
    return block


def _check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def _stack(columns: np.ndarray) -> np.ndarray:
    """Complex ``(rows, P)`` to real ``(2 rows, P)``: real parts over imaginary parts."""
    return np.vstack([columns.real, columns.imag])


def complex_jacobian(c: Circuit, theta: Sequence[float], mode: str = "unitary") -> np.ndarray:
    """Complex Jacobian, one column per raw parameter (``vec`` is row-major)."""
    _check_mode(mode)
    idx, ders = _gate_derivatives(c, theta, mode)
    rows = (1 << c.n_qubits) ** (2 if mode == "unitary" else 1)
    jac = np.zeros((rows, c.raw_param_count), dtype=complex)
    for gi, d in zip(idx, ders):
        flat = d.reshape(-1)
        for pid, coeff in c.gates[gi].expr.terms:
            jac[:, pid] += coeff * flat
    return jac


def unitary_jacobian(c: Circuit, theta: Sequence[float]) -> np.ndarray:
    """Real Jacobian of ``vec U`` with shape ``(2 * 4**n, P)``."""
    return _stack(complex_jacobian(c, theta, "unitary"))


def state_jacobian(c: Circuit, theta: Sequence[float], *, project_phase: bool = True) -> np.ndarray:
    """Real Jacobian of the output state, shape ``(2 * 2**n, P)``.

    With ``project_phase`` the component along ``i|psi>`` is removed from every
    column, so global-phase motion does not count as a direction.
    """
    jac = complex_jacobian(c, theta, "state")
    if project_phase:
        psi = _output(c, theta, "state")
        ipsi = _stack((1j * psi)[:, None])[:, 0]
        real = _stack(jac)
        return real - np.outer(ipsi, ipsi @ real)
    return _stack(jac)


def jacobian(c: Circuit, theta: Sequence[float], mode: str = "unitary") -> np.ndarray:
    _check_mode(mode)
    return unitary_jacobian(c, theta) if mode == "unitary" else state_jacobian(c, theta)


def finite_difference_jacobian(c: Circuit, theta: Sequence[float], mode: str = "unitary",
                               h: float = 1e-5) -> np.ndarray:
    """Central differences of the raw output (no phase projection)."""
    _check_mode(mode)
    theta = np.asarray(theta, dtype=float)
    cols = []
    for k in range(c.raw_param_count):
        plus, minus = theta.copy(), theta.copy()
        plus[k] += h
        minus[k] -= h
        diff = (_output(c, plus, mode) - _output(c, minus, mode)).reshape(-1) / (2 * h)
        cols.append(diff)
    if not cols:
        rows = (1 << c.n_qubits) ** (2 if mode == "unitary" else 1)
        return np.zeros((2 * rows, 0))
    return _stack(np.array(cols).T)


def numerical_rank(jac: np.ndarray, rel_tol: float = DEFAULT_REL_TOL) -> int:
    """Number of singular values above ``max(rel_tol * sigma_max, ABS_FLOOR)``."""
    return _rank_and_spectrum(jac, rel_tol)[0]


def _rank_and_spectrum(jac: np.ndarray, rel_tol: float) -> tuple[int, np.ndarray]:
    if not 0 < rel_tol <= 1e-2:
        raise ValidationError(f"rel_tol must lie in (0, 1e-2], got {rel_tol}")
    jac = np.asarray(jac, dtype=float)
    if jac.ndim != 2 or jac.size == 0:
        raise EmptyMatrix("Jacobian has no entries")
    sv = np.linalg.svd(jac, compute_uv=False)
    return int(np.sum(sv > max(rel_tol * sv[0], ABS_FLOOR))), sv


@dataclass(frozen=True)
class RankReport:
    mode: str
    ranks: tuple[int, ...]
    rank: int
    rel_tol: float
    singular_values: tuple[float, ...]
    seed: int | None
    n_params: int
    subsampled: bool = False

    @property
    def seeds_disagree(self) -> bool:
        return len(set(self.ranks)) > 1

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "rank": self.rank,
            "ranks": list(self.ranks),
            "seeds_disagree": self.seeds_disagree,
            "rel_tol": self.rel_tol,
            "seed": self.seed,
            "n_params": self.n_params,
            "subsampled": self.subsampled,
            "singular_values": list(self.singular_values),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def expressive_rank(c: Circuit, mode: str = "unitary", seeds: int = 3, *,
                    rel_tol: float = DEFAULT_REL_TOL, seed: int | None = 0,
                    subsample: bool | None = None) -> RankReport:
    """Maximum Jacobian rank over ``seeds`` uniform draws of theta in ``[0, 2pi)``.

    ``subsample=None`` keeps ``4 P`` random rows only for large unitary
    Jacobians (more than 200 parameters or more than 8 qubits).
    """
    _check_mode(mode)
    if seeds < 1:
        raise ValidationError("seeds must be >= 1")
    P = c.raw_param_count
    if P == 0:
        return RankReport(mode, (0,) * seeds, 0, rel_tol, (), seed, 0)
    if subsample is None:
        subsample = mode == "unitary" and (P > SUBSAMPLE_PARAMS or c.n_qubits > SUBSAMPLE_QUBITS)
    children = np.random.SeedSequence(seed).spawn(seeds)
    ranks, best_sv = [], None
    for child in children:
        rng = np.random.default_rng(child)
        theta = rng.uniform(0.0, 2 * math.pi, P)
        jac = jacobian(c, theta, mode)
        if subsample and jac.shape[0] > 4 * P:
            jac = jac[rng.choice(jac.shape[0], 4 * P, replace=False)]
        r, sv = _rank_and_spectrum(jac, rel_tol)
        if not ranks or r > max(ranks):
            best_sv = sv
        ranks.append(r)
    top = tuple(float(x) for x in best_sv[: 2 * P])
    return RankReport(mode, tuple(ranks), max(ranks), rel_tol, top, seed, P, bool(subsample))

"""Pauli-sum observables.

A Pauli string is written with qubit 0 as the rightmost letter, matching the
integer labels of basis states (``"ZI"`` is Z on qubit 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..errors import ArityMismatch, DimensionTooLarge, InconsistentArity, ParseError, ValidationError
from ..qsim import eigensolve

LETTERS = "IXYZ"
MAX_DENSE_QUBITS = 10
MAX_DIAGONAL_QUBITS = 20


@dataclass(frozen=True)
class PauliString:
    letters: str

    def __post_init__(self):
        s = self.letters.upper()
        if not s or set(s) - set(LETTERS):
            raise ValidationError(f"invalid Pauli string {self.letters!r}")
        object.__setattr__(self, "letters", s)

    @property
    def n(self) -> int:
        return len(self.letters)

    def letter(self, q: int) -> str:
        return self.letters[self.n - 1 - q]

    @property
    def masks(self) -> tuple[int, int, int]:
        """``(x_mask, z_mask, y_count)`` with Y counted in both masks."""
        xm = zm = ny = 0
        for q in range(self.n):
            ch = self.letter(q)
            if ch in "XY":
                xm |= 1 << q
            if ch in "ZY":
                zm |= 1 << q
            ny += ch == "Y"
        return xm, zm, ny

    @property
    def is_diagonal(self) -> bool:
        return set(self.letters) <= {"I", "Z"}

    @classmethod
    def from_ops(cls, n: int, ops: dict[int, str]) -> "PauliString":
        chars = ["I"] * n
        for q, ch in ops.items():
            chars[n - 1 - q] = ch
        return cls("".join(chars))

    def __str__(self) -> str:
        return self.letters


def _action(n: int, p: PauliString) -> tuple[int, np.ndarray]:
    """``P|x> = phase[x] |x ^ flip>``."""
    xm, zm, ny = p.masks
    idx = np.arange(1 << n)
    parity = np.zeros(1 << n, dtype=np.int64)
    masked = idx & zm
    for q in range(n):
        parity ^= (masked >> q) & 1
    phase = (1j) ** ny * (1 - 2 * parity)
    return xm, phase.astype(complex)


class Observable:
    """Real-weighted sum of Pauli strings plus a constant offset."""

    def __init__(self, terms: Iterable[tuple[float, PauliString | str]] = (), offset: float = 0.0,
                 n: int | None = None):
        merged: dict[str, float] = {}
        for coeff, p in terms:
            p = p if isinstance(p, PauliString) else PauliString(p)
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise ValidationError("coefficients must be finite")
            if n is None:
                n = p.n
            elif p.n != n:
                raise InconsistentArity(f"term {p} has {p.n} qubits, expected {n}")
            if set(p.letters) == {"I"}:
                offset += coeff
                continue
            merged[p.letters] = merged.get(p.letters, 0.0) + coeff
        if n is None:
            raise ValidationError("observable arity is unknown; pass n for a constant observable")
        self.n = int(n)
        self.terms: tuple[tuple[float, PauliString], ...] = tuple(
            (c, PauliString(s)) for s, c in merged.items() if c != 0.0
        )
        self.offset = float(offset)
        if not math.isfinite(self.offset):
            raise ValidationError("offset must be finite")
        self._compiled = None

    # -- construction helpers ------------------------------------------------

    @classmethod
    def constant(cls, n: int, value: float) -> "Observable":
        return cls((), value, n)

    def __add__(self, other: "Observable") -> "Observable":
        if other.n != self.n:
            raise ArityMismatch("observables act on different qubit counts")
        return Observable(self.terms + other.terms, self.offset + other.offset, self.n)

    def __mul__(self, scale: float) -> "Observable":
        return Observable(((scale * c, p) for c, p in self.terms), scale * self.offset, self.n)

    __rmul__ = __mul__

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Observable):
            return NotImplemented
        mine = {p.letters: c for c, p in self.terms}
        theirs = {p.letters: c for c, p in other.terms}
        return self.n == other.n and self.offset == other.offset and mine == theirs

    def __repr__(self) -> str:
        return f"Observable(n={self.n}, terms={len(self.terms)}, offset={self.offset})"

    @property
    def is_diagonal(self) -> bool:
        return all(p.is_diagonal for _, p in self.terms)

    @property
    def norm_bound(self) -> float:
        return abs(self.offset) + sum(abs(c) for c, _ in self.terms)

    # -- numerics ------------------------------------------------------------------

    def _compile(self):
        """Group terms by flip mask: ``diag`` plus ``{flip: weight}`` vectors."""
        if self._compiled is None:
            diag = np.full(1 << self.n, self.offset, dtype=float)
            off: dict[int, np.ndarray] = {}
            for c, p in self.terms:
                flip, phase = _action(self.n, p)
                if flip == 0:
                    diag += c * phase.real
                else:
                    off[flip] = off.get(flip, 0) + c * phase
            self._compiled = (diag, tuple(off.items()))
        return self._compiled

    def diagonal(self) -> np.ndarray:
        """Diagonal of the matrix; the full matrix when the observable is diagonal."""
        return self._compile()[0].copy()

    def apply(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex)
        if psi.shape[0] != 1 << self.n:
            raise ArityMismatch(f"state has dimension {psi.shape[0]}, observable needs {1 << self.n}")
        diag, off = self._compile()
        out = diag.reshape((-1,) + (1,) * (psi.ndim - 1)) * psi
        idx = np.arange(1 << self.n)
        for flip, w in off:
            out[idx ^ flip] += w.reshape((-1,) + (1,) * (psi.ndim - 1)) * psi
        return out

    def to_dense(self) -> np.ndarray:
        if self.n > MAX_DENSE_QUBITS + 2:
            raise DimensionTooLarge(f"dense matrix for n={self.n} is too large")
        return self.apply(np.eye(1 << self.n, dtype=complex))

    def expectation(self, psi: np.ndarray, *, check: bool = True) -> float:
        psi = np.asarray(psi, dtype=complex)
        if psi.ndim != 1 or psi.shape[0] != 1 << self.n:
            raise ArityMismatch(f"state has shape {psi.shape}, observable needs ({1 << self.n},)")
        diag, off = self._compile()
        val = complex(np.dot(diag, (psi.conj() * psi).real))
        idx = np.arange(1 << self.n)
        for flip, w in off:
            val += np.vdot(psi[idx ^ flip], w * psi)
        if check and abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
            raise ValidationError(f"expectation has imaginary residue {val.imag:.3e}")
        return float(val.real)

    # -- text format ----------------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"offset {self.offset!r}"] if self.offset else []
        lines += [f"{c!r} {p.letters}" for c, p in self.terms]
        return "\n".join(lines) + "\n"


def expectation(psi: np.ndarray, obs: Observable) -> float:
    return obs.expectation(psi)


def parse_observable(text: str, n: int | None = None) -> Observable:
    terms: list[tuple[float, PauliString]] = []
    offset = 0.0
    width = n
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParseError("expected '<coefficient> <pauli-string>'", line=lineno)
        if fields[0].lower() == "offset":
            try:
                offset += float(fields[1])
            except ValueError:
                raise ParseError(f"bad offset {fields[1]!r}", line=lineno) from None
            continue
        try:
            coeff = float(fields[0])
        except ValueError:
            raise ParseError(f"bad coefficient {fields[0]!r}", line=lineno) from None
        if not math.isfinite(coeff):
            raise ParseError("coefficient must be finite", line=lineno)
        try:
            p = PauliString(fields[1])
        except ValidationError:
            raise ParseError(f"bad Pauli string {fields[1]!r}", line=lineno) from None
        if width is None:
            width = p.n
        elif p.n != width:
            raise InconsistentArity(f"line {lineno}: {p.n} qubits, expected {width}")
        terms.append((coeff, p))
    if width is None:
        raise ParseError("no terms and no arity")
    return Observable(terms, offset, width)


def load_hamiltonian(path) -> Observable:
    return parse_observable(Path(path).read_text(encoding="utf-8"))


def save_hamiltonian(obs: Observable, path) -> None:
    Path(path).write_text(obs.to_text(), encoding="utf-8")


# -- exact minimum -----------------------------------------------------------------

@dataclass(frozen=True)
class ExactMinimum:
    energy: float
    bitstring: int | None = None
    vector: np.ndarray | None = None
    method: str = "diagonal"


def exact_minimum(obs: Observable, *, method: str = "auto", eig_method: str = "lapack") -> ExactMinimum:
    """Lowest eigenvalue: bitstring scan for diagonal observables, dense solve otherwise."""
    if method not in ("auto", "diagonal", "dense"):
        raise ValidationError(f"unknown method {method!r}")
    use_diag = method == "diagonal" or (method == "auto" and obs.is_diagonal)
    if use_diag:
        if not obs.is_diagonal:
            raise ValidationError("observable has off-diagonal terms")
        if obs.n > MAX_DIAGONAL_QUBITS:
            raise DimensionTooLarge(f"diagonal scan limited to {MAX_DIAGONAL_QUBITS} qubits")
        diag = obs.diagonal()
        k = int(np.argmin(diag))
        return ExactMinimum(float(diag[k]), bitstring=k, method="diagonal")
    if obs.n > MAX_DENSE_QUBITS:
        raise DimensionTooLarge(f"dense eigensolver limited to {MAX_DENSE_QUBITS} qubits")
    vals, vecs = eigensolve(obs.to_dense(), method=eig_method)
    return ExactMinimum(float(vals[0]), vector=vecs[:, 0], method="dense")


def random_observable(n: int, n_terms: int, rng: np.random.Generator,
                      letters: Sequence[str] = LETTERS) -> Observable:
    terms = []
    for _ in range(n_terms):
        s = "".join(rng.choice(list(letters), size=n))
        terms.append((float(rng.normal()), PauliString(s)))
    return Observable(terms, float(rng.normal()), n)

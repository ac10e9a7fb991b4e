"""CX-only layers as invertible linear maps over GF(2).

A computational basis label ``x`` is read as the bit vector ``(x_0, ..., x_{n-1})``
with ``x_k = (x >> k) & 1``. ``CX(c -> t)`` maps ``x`` to ``x`` with bit ``t``
replaced by ``x_t xor x_c``, i.e. the matrix ``I + e_t e_c^T``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceeded, IndexOutOfRange, InvalidColumn, NotInvertible, ParseError, ValidationError

DEFAULT_CAP = 1 << 20

CxLayer = list  # list of (control, target) pairs in time order


def validate_layer(layer: Iterable[Sequence[int]], n: int) -> list[tuple[int, int]]:
    out = []
    for pair in layer:
        c, t = (int(v) for v in pair)
        if c == t:
            raise IndexOutOfRange(f"CX control equals target ({c})")
        if not (0 <= c < n and 0 <= t < n):
            raise IndexOutOfRange(f"CX({c}->{t}) out of range for n={n}")
        out.append((c, t))
    return out


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.uint8)


def gf2_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return ((a.astype(np.int64) @ b.astype(np.int64)) & 1).astype(np.uint8)


def layer_to_gf2(layer: Iterable[Sequence[int]], n: int) -> np.ndarray:
    """Matrix of a CX sequence; later gates multiply on the left."""
    m = identity(n)
    for c, t in validate_layer(layer, n):
        m[t] ^= m[c]
    return m


def bits(x: int, n: int) -> np.ndarray:
    return np.array([(x >> k) & 1 for k in range(n)], dtype=np.uint8)


def label(v: np.ndarray) -> int:
    return int(sum(int(b) << k for k, b in enumerate(v)))


def apply_gf2(m: np.ndarray, x: int) -> int:
    return label(gf2_mul(m, bits(x, m.shape[0])[:, None])[:, 0])


def gf2_rank(m: np.ndarray) -> int:
    a = np.array(m, dtype=np.uint8) & 1
    rows, cols = a.shape
    r = 0
    for col in range(cols):
        pivot = next((i for i in range(r, rows) if a[i, col]), None)
        if pivot is None:
            continue
        a[[r, pivot]] = a[[pivot, r]]
        for i in range(rows):
            if i != r and a[i, col]:
                a[i] ^= a[r]
        r += 1
    return r


def is_invertible(m: np.ndarray) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and m.shape[0] > 0 and gf2_rank(m) == m.shape[0]


def _require_invertible(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.uint8) & 1
    if not is_invertible(m):
        raise NotInvertible("matrix is singular over GF(2)")
    return m


def order(m: np.ndarray, cap: int = DEFAULT_CAP) -> int:
    """Smallest ``k >= 1`` with ``M^k = I``."""
    m = _require_invertible(m)
    if cap < 1:
        raise ValidationError("cap must be >= 1")
    eye = identity(m.shape[0])
    power = m.copy()
    for k in range(1, cap + 1):
        if np.array_equal(power, eye):
            return k
        power = gf2_mul(m, power)
    raise CapExceeded(cap)


def basis_permutation(m: np.ndarray) -> np.ndarray:
    """Images of every basis label under ``x -> M x``."""
    n = m.shape[0]
    images = np.zeros(1 << n, dtype=np.int64)
    cols = [label(m[:, k]) for k in range(n)]
    for x in range(1, 1 << n):
        low = (x & -x).bit_length() - 1
        images[x] = images[x & (x - 1)] ^ cols[low]
    return images


def layer_permutation(layer: Iterable[Sequence[int]], n: int) -> np.ndarray:
    """Basis permutation of a CX layer computed gate by gate on labels."""
    x = np.arange(1 << n)
    for c, t in validate_layer(layer, n):
        x = x ^ (((x >> c) & 1) << t)
    return x


def check_permutation(images: Sequence[int]) -> np.ndarray:
    images = np.asarray(images, dtype=np.int64)
    size = images.shape[0]
    n = size.bit_length() - 1
    if size < 2 or size != 1 << n:
        raise ValidationError(f"permutation length {size} is not 2**n with n >= 1")
    if sorted(images.tolist()) != list(range(size)):
        raise ValidationError("images are not a bijection")
    return images


@dataclass(frozen=True)
class NotLinear:
    """Witness that a basis permutation is not a GF(2)-linear map."""

    x: int
    y: int
    reason: str

    def __bool__(self) -> bool:  # lets callers write ``if is_linear(p):``
        return False


def is_linear(images: Sequence[int]) -> np.ndarray | NotLinear:
    """Matrix of the permutation if it is linear over GF(2), else a ``NotLinear`` witness.

    The witness pair satisfies ``perm(x ^ y) != perm(x) ^ perm(y)``.
    """
    images = check_permutation(images)
    n = images.shape[0].bit_length() - 1
    if images[0] != 0:
        return NotLinear(0, 0, "perm(0) != 0")
    m = np.zeros((n, n), dtype=np.uint8)
    for k in range(n):
        m[:, k] = bits(int(images[1 << k]), n)
    for x in range(1, 1 << n):
        high = 1 << (x.bit_length() - 1)
        rest = x ^ high
        if images[x] != images[high] ^ images[rest]:
            return NotLinear(high, rest, f"perm({x}) != perm({high}) ^ perm({rest})")
    return m


def gauss_decompose(m: np.ndarray) -> list[tuple[int, int]]:
    """CX sequence (time order) whose matrix is ``M``; at most ``n**2`` gates.

    Row operations ``row_t ^= row_c`` reduce ``M`` to the identity; each is a
    left multiplication by ``CX(c -> t)``, so the circuit is their reverse.
    """
    a = _require_invertible(m).copy()
    n = a.shape[0]
    ops: list[tuple[int, int]] = []

    def rowop(c: int, t: int):
        a[t] ^= a[c]
        ops.append((c, t))

    for col in range(n):
        if not a[col, col]:
            pivot = next(i for i in range(col + 1, n) if a[i, col])
            rowop(pivot, col)
        for i in range(n):
            if i != col and a[i, col]:
                rowop(col, i)
    # E_k ... E_1 M = I  =>  M = E_1 ... E_k, and the rightmost factor acts first
    return ops[::-1]


def _complete_basis(v: np.ndarray) -> np.ndarray:
    """Invertible matrix whose first column is ``v``; greedy on the lowest set bit."""
    n = v.shape[0]
    cols = [v.copy()]
    for k in range(n):
        e = np.zeros(n, dtype=np.uint8)
        e[k] = 1
        cand = np.array(cols + [e]).T
        if gf2_rank(cand) == len(cols) + 1:
            cols.append(e)
        if len(cols) == n:
            break
    return np.array(cols, dtype=np.uint8).T


def gf2_inverse(m: np.ndarray) -> np.ndarray:
    a = _require_invertible(m)
    n = a.shape[0]
    aug = np.concatenate([a, identity(n)], axis=1)
    for col in range(n):
        pivot = next(i for i in range(col, n) if aug[i, col])
        aug[[col, pivot]] = aug[[pivot, col]]
        for i in range(n):
            if i != col and aug[i, col]:
                aug[i] ^= aug[col]
    return aug[:, n:].copy()


def synthesize_column_move(n: int, i: int, j: int) -> list[tuple[int, int]]:
    """CX layer ``E`` such that column ``j`` of ``U E`` is column ``i`` of ``U``.

    Columns are 1-indexed, so column ``k`` is basis label ``k - 1``; the
    all-zero label (column 1) is fixed by every CX layer and cannot move.
    """
    if n < 2:
        raise ValidationError("n must be >= 2")
    size = 1 << n
    for name, col in (("i", i), ("j", j)):
        if not 2 <= col <= size:
            raise InvalidColumn(f"column {name}={col} must lie in 2..{size}")
    if i == j:
        return []
    u, v = bits(i - 1, n), bits(j - 1, n)
    m = gf2_mul(_complete_basis(u), gf2_inverse(_complete_basis(v)))
    layer = gauss_decompose(m)
    if apply_gf2(layer_to_gf2(layer, n), j - 1) != i - 1:
        raise AssertionError("column move synthesis failed verification")
    return layer


# -- text formats -----------------------------------------------------------

def format_layer(layer: Iterable[Sequence[int]]) -> str:
    return "".join(f"{c} {t}\n" for c, t in layer)


def parse_layer(text: str, n: int | None = None) -> list[tuple[int, int]]:
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        fields = stripped.split()
        if len(fields) != 2:
            raise ParseError("expected 'control target'", line=lineno)
        try:
            c, t = int(fields[0]), int(fields[1])
        except ValueError:
            raise ParseError("indices must be integers", line=lineno) from None
        if c == t or c < 0 or t < 0 or (n is not None and max(c, t) >= n):
            raise ParseError(f"invalid pair {c} {t}", line=lineno)
        pairs.append((c, t))
    return pairs


def format_matrix(m: np.ndarray) -> str:
    return "".join("".join(str(int(b)) for b in row) + "\n" for row in m)


def parse_matrix(text: str) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if set(line) - {"0", "1"}:
            raise ParseError("rows must be 0/1 strings", line=lineno)
        rows.append([int(ch) for ch in line])
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ParseError("matrix must be square and non-empty")
    return np.array(rows, dtype=np.uint8)


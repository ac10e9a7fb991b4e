"""Combinatorial problems encoded as diagonal observables.

Binary variables map to qubits through ``x = (1 - Z) / 2``, so the basis state
``|b>`` assigns ``x_q = (b >> q) & 1``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from ..errors import EmptyGraph, ParseError, PenaltyTooSmall, TooManyQubits, ValidationError
from .observable import Observable, PauliString, load_hamiltonian, parse_observable

MAX_TSP_QUBITS = 12


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        seen = set()
        for u, v, w in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError(f"edge ({u}, {v}) references a vertex outside 0..{self.n - 1}")
            if u == v:
                raise ValidationError(f"self-loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValidationError(f"duplicate edge {key}")
            seen.add(key)
            if w < 0:
                raise ValidationError(f"negative weight on edge {key}")

    @classmethod
    def from_edges(cls, n: int, edges: Sequence[Sequence[float]]) -> "Graph":
        out = []
        for e in edges:
            u, v = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else 1.0
            out.append((u, v, w))
        return cls(n, tuple(out))

    def to_text(self) -> str:
        lines = [f"{self.n} {len(self.edges)}"]
        lines += [f"{u} {v} {w:g}" for u, v, w in self.edges]
        return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    """First data line ``n m``, then ``u v [w]`` per edge; ``#`` starts a comment."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))
    if not rows:
        raise ParseError("empty graph file")
    lineno, head = rows[0]
    if len(head) != 2:
        raise ParseError("header must be 'n m'", line=lineno)
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError("header must be two integers", line=lineno) from None
    if len(rows) - 1 != m:
        raise ParseError(f"header promises {m} edges, found {len(rows) - 1}", line=lineno)
    edges = []
    for lineno, fields in rows[1:]:
        if len(fields) not in (2, 3):
            raise ParseError("edge must be 'u v [w]'", line=lineno)
        try:
            u, v = int(fields[0]), int(fields[1])
            w = float(fields[2]) if len(fields) == 3 else 1.0
        except ValueError:
            raise ParseError("malformed edge", line=lineno) from None
        edges.append((u, v, w))
    try:
        return Graph(n, tuple(edges))
    except ValidationError as exc:
        raise ParseError(str(exc)) from exc


def load_graph(path) -> Graph:
    return parse_graph(Path(path).read_text(encoding="utf-8"))


def load_distances(path) -> np.ndarray:
    return parse_distances(Path(path).read_text(encoding="utf-8"))


def parse_distances(text: str) -> np.ndarray:
    rows = []
    reader = csv.reader(line for line in io.StringIO(text) if line.strip() and not line.lstrip().startswith("#"))
    for lineno, row in enumerate(reader, start=1):
        try:
            rows.append([float(x) for x in row])
        except ValueError:
            raise ParseError("distance entries must be numbers", line=lineno) from None
    if any(len(r) != len(rows) for r in rows):
        raise ParseError("distance matrix must be square with at least 2 cities")
    d = np.array(rows, dtype=float)
    if d.shape[0] < 2:
        raise ParseError("distance matrix must be square with at least 2 cities")
    return d


# -- QUBO helper ---------------------------------------------------------------

def qubo_to_observable(n: int, const: float, linear: Mapping[int, float],
                       quadratic: Mapping[tuple[int, int], float]) -> Observable:
    """``const + sum h_i x_i + sum J_ij x_i x_j`` with ``x = (1 - Z) / 2``."""
    offset = float(const)
    z: dict[int, float] = {}
    zz: dict[tuple[int, int], float] = {}
    for i, h in linear.items():
        offset += h / 2
        z[i] = z.get(i, 0.0) - h / 2
    for (i, j), jij in quadratic.items():
        if i == j:
            offset += jij / 2
            z[i] = z.get(i, 0.0) - jij / 2
            continue
        key = (min(i, j), max(i, j))
        offset += jij / 4
        z[i] = z.get(i, 0.0) - jij / 4
        z[j] = z.get(j, 0.0) - jij / 4
        zz[key] = zz.get(key, 0.0) + jij / 4
    terms = [(c, PauliString.from_ops(n, {i: "Z"})) for i, c in z.items()]
    terms += [(c, PauliString.from_ops(n, {i: "Z", j: "Z"})) for (i, j), c in zz.items()]
    return Observable(terms, offset, n)


# -- problems -------------------------------------------------------------------

@dataclass(frozen=True)
class Problem:
    """An observable to minimize plus the map from its energy to the reported cost."""

    kind: str
    observable: Observable
    cost_sign: float = 1.0  # reported cost = cost_sign * energy
    payload: dict = field(default_factory=dict)

    def cost(self, energy: float) -> float:
        return self.cost_sign * energy


def encode_maxcut(graph: Graph) -> Problem:
    """``H = sum w (Z_u Z_v - 1) / 2``; its minimum is minus the maximum cut."""
    if not graph.edges:
        raise EmptyGraph("max-cut needs at least one edge")
    n = graph.n
    terms = [(w / 2, PauliString.from_ops(n, {u: "Z", v: "Z"})) for u, v, w in graph.edges]
    offset = -sum(w for _, _, w in graph.edges) / 2
    return Problem("maxcut", Observable(terms, offset, n), -1.0, {"graph": graph})


def encode_vertex_cover(graph: Graph, penalty: float = 2.0,
                        weights: Sequence[float] | None = None) -> Problem:
    """``A sum_(u,v) (1 - x_u)(1 - x_v) + sum_v w_v x_v``."""
    if graph.n == 0 or not graph.edges:
        raise EmptyGraph("vertex cover needs at least one edge")
    w = np.ones(graph.n) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (graph.n,):
        raise ValidationError("one weight per vertex required")
    if penalty <= float(w.max()):
        raise PenaltyTooSmall(f"penalty {penalty} must exceed the largest vertex weight {w.max()}")
    linear: dict[int, float] = {v: float(w[v]) for v in range(graph.n)}
    quadratic: dict[tuple[int, int], float] = {}
    const = 0.0
    for u, v, _ in graph.edges:
        const += penalty
        linear[u] -= penalty
        linear[v] -= penalty
        quadratic[(u, v)] = quadratic.get((u, v), 0.0) + penalty
    obs = qubo_to_observable(graph.n, const, linear, quadratic)
    return Problem("vertex-cover", obs, 1.0, {"graph": graph, "penalty": penalty})


def tsp_qubit(city: int, position: int, n_cities: int) -> int:
    return city * n_cities + position


def encode_tsp(dist: np.ndarray, penalty: float | None = None) -> Problem:
    """One-hot encoding: ``x_{v,p} = 1`` when city ``v`` is visited at step ``p``.

    Tour cost ``sum_p sum_{u != v} d(u, v) x_{u,p} x_{v,p+1}`` (cyclic) plus
    ``A`` times the squared one-hot violations of every row and column.
    """
    d = np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] < 2:
        raise ValidationError("distance matrix must be square with at least 2 cities")
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise ValidationError("distances must be finite and non-negative")
    nc = d.shape[0]
    n = nc * nc
    if n > MAX_TSP_QUBITS:
        raise TooManyQubits(f"{nc} cities need {n} qubits, limit is {MAX_TSP_QUBITS}")
    dmax = float(d.max())
    if penalty is None:
        penalty = 2.0 * nc * dmax
    if penalty <= nc * dmax:
        raise PenaltyTooSmall(f"penalty {penalty} must exceed n_cities * max(dist) = {nc * dmax}")
    q = lambda v, p: tsp_qubit(v, p, nc)  # noqa: E731
    const = 0.0
    linear: dict[int, float] = {i: 0.0 for i in range(n)}
    quadratic: dict[tuple[int, int], float] = {}

    def add_quad(i: int, j: int, val: float):
        key = (min(i, j), max(i, j))
        quadratic[key] = quadratic.get(key, 0.0) + val

    for p in range(nc):
        nxt = (p + 1) % nc
        for u in range(nc):
            for v in range(nc):
                if u != v and d[u, v]:
                    add_quad(q(u, p), q(v, nxt), d[u, v])
    # (1 - sum_k y_k)^2 = 1 - sum_k y_k + 2 sum_{k<l} y_k y_l  for binary y
    groups = [[q(v, p) for p in range(nc)] for v in range(nc)]
    groups += [[q(v, p) for v in range(nc)] for p in range(nc)]
    for group in groups:
        const += penalty
        for a, i in enumerate(group):
            linear[i] -= penalty
            for j in group[a + 1:]:
                add_quad(i, j, 2 * penalty)
    obs = qubo_to_observable(n, const, linear, quadratic)
    return Problem("tsp", obs, 1.0, {"dist": d, "penalty": penalty})


def decode_tsp(bitstring: int, n_cities: int) -> list[int] | None:
    """City order for a valid one-hot assignment, otherwise ``None``."""
    tour = []
    for p in range(n_cities):
        cities = [v for v in range(n_cities) if (bitstring >> tsp_qubit(v, p, n_cities)) & 1]
        if len(cities) != 1:
            return None
        tour.append(cities[0])
    return tour if len(set(tour)) == n_cities else None


def hamiltonian_problem(obs: Observable, name: str = "hamiltonian") -> Problem:
    return Problem("hamiltonian-file", obs, 1.0, {"name": name})


# -- bundled data -----------------------------------------------------------------

DATA_PACKAGE = "ansatz_lab.data"


def data_path(name: str) -> Path:
    return Path(str(resources.files(DATA_PACKAGE).joinpath(name)))


def bundled_hamiltonians() -> list[str]:
    return sorted(p.name for p in resources.files(DATA_PACKAGE).iterdir() if p.name.endswith(".pauli"))


def bundled_problem(name: str) -> Problem:
    """``maxcut_4``, ``vertex_cover_6``, ``tsp_3`` or any bundled ``.pauli`` file."""
    if name == "maxcut_4":
        return encode_maxcut(load_graph(data_path("maxcut_4.graph")))
    if name == "vertex_cover_6":
        return encode_vertex_cover(load_graph(data_path("vertex_cover_6.graph")))
    if name == "tsp_3":
        return encode_tsp(load_distances(data_path("tsp_3.csv")))
    fname = name if name.endswith(".pauli") else name + ".pauli"
    path = data_path(fname)
    if not path.is_file():
        raise ValidationError(f"no bundled problem named {name!r}")
    return hamiltonian_problem(load_hamiltonian(path), fname[:-6])


def bundled_ground_energy(name: str) -> float | None:
    """Ground energy recorded in a bundled Hamiltonian's ``# ground_energy:`` header."""
    fname = name if name.endswith(".pauli") else name + ".pauli"
    for line in data_path(fname).read_text(encoding="utf-8").splitlines():
        if line.startswith("# ground_energy:"):
            return float(line.split(":", 1)[1])
    return None

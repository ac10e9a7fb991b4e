"""Parameterized circuits with exact affine angle expressions, and ansatz builders."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ArityMismatch, IndexOutOfRange, InvalidSpec, ParseError
from .qsim import GateKind

HALF_PI = math.pi / 2


@dataclass(frozen=True)
class ParamExpr:
    """``sum_k coeff_k * theta_k + const_half_pi * pi/2`` with integer coefficients."""

    terms: tuple[tuple[int, int], ...] = ()
    const_half_pi: int = 0

    def __post_init__(self):
        merged: dict[int, int] = {}
        for pid, coeff in self.terms:
            merged[int(pid)] = merged.get(int(pid), 0) + int(coeff)
        clean = tuple(sorted((p, c) for p, c in merged.items() if c != 0))
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "const_half_pi", int(self.const_half_pi))

    @classmethod
    def param(cls, pid: int, coeff: int = 1) -> "ParamExpr":
        return cls(((pid, coeff),))

    @classmethod
    def constant(cls, k: int) -> "ParamExpr":
        return cls((), k)

    def __add__(self, other: "ParamExpr") -> "ParamExpr":
        return ParamExpr(self.terms + other.terms, self.const_half_pi + other.const_half_pi)

    def __neg__(self) -> "ParamExpr":
        return ParamExpr(tuple((p, -c) for p, c in self.terms), -self.const_half_pi)

    def scaled(self, sign: int) -> "ParamExpr":
        return self if sign > 0 else -self

    @property
    def params(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.terms)

    @property
    def is_constant(self) -> bool:
        return not self.terms

    def coeff(self, pid: int) -> int:
        return dict(self.terms).get(pid, 0)

    def evaluate(self, theta: Sequence[float]) -> float:
        return sum(c * float(theta[p]) for p, c in self.terms) + self.const_half_pi * HALF_PI

    def to_json(self) -> dict:
        return {"terms": {str(p): c for p, c in self.terms}, "const_half_pi": self.const_half_pi}

    def __str__(self) -> str:
        parts = []
        for p, c in self.terms:
            sign = "-" if c < 0 else "+"
            mag = "" if abs(c) == 1 else f"{abs(c)}*"
            parts.append(f"{sign} {mag}t{p}")
        if self.const_half_pi:
            sign = "-" if self.const_half_pi < 0 else "+"
            parts.append(f"{sign} {abs(self.const_half_pi)}*pi/2")
        text = " ".join(parts) or "0"
        return text[2:] if text.startswith("+ ") else text


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: tuple[int, ...]
    expr: ParamExpr | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))

    @property
    def is_rotation(self) -> bool:
        return self.kind.is_rotation


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    raw_param_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for i, g in enumerate(self.gates):
            if len(g.qubits) != g.kind.arity or len(set(g.qubits)) != len(g.qubits):
                raise IndexOutOfRange(f"gate {i}: bad qubit list {g.qubits} for {g.kind.value}")
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise IndexOutOfRange(f"gate {i}: qubit {q} >= n_qubits={self.n_qubits}")
            if g.is_rotation:
                if g.expr is None:
                    raise InvalidSpec(f"gate {i}: rotation without expression")
                for p in g.expr.params:
                    if not 0 <= p < self.raw_param_count:
                        raise IndexOutOfRange(f"gate {i}: parameter {p} >= {self.raw_param_count}")
            elif g.expr is not None:
                raise InvalidSpec(f"gate {i}: {g.kind.value} takes no expression")

    def bind(self, theta: Sequence[float]) -> list[tuple[GateKind, tuple[int, ...], float | None]]:
        """Evaluate every expression; returns ``(kind, qubits, angle)`` triples."""
        theta = np.asarray(theta, dtype=float).ravel()
        if theta.shape[0] != self.raw_param_count:
            raise ArityMismatch(f"expected {self.raw_param_count} parameters, got {theta.shape[0]}")
        return [
            (g.kind, g.qubits, g.expr.evaluate(theta) if g.is_rotation else None)
            for g in self.gates
        ]

    @property
    def cx_count(self) -> int:
        return sum(1 for g in self.gates if g.kind is GateKind.CX)

    def rotation_indices(self) -> list[int]:
        return [i for i, g in enumerate(self.gates) if g.is_rotation]


# -- ansatz families -------------------------------------------------------

class Family(str, enum.Enum):
    RX_CX_L = "rx-cx-l"
    RX_CX_L_MOD = "rx-cx-l-mod"
    RX_CX_A = "rx-cx-a"
    RX_RZ_CX_A = "rx-rz-cx-a"
    RY_CX_A = "ry-cx-a"
    RX_RY_CX_A = "rx-ry-cx-a"
    RY_RZ_CX_A = "ry-rz-cx-a"

    @classmethod
    def parse(cls, name: "str | Family") -> "Family":
        if isinstance(name, Family):
            return name
        key = str(name).strip().lower().replace("_", "-")
        if key in ("rx-cx-l-modified", "rx-cx-lm"):
            key = "rx-cx-l-mod"
        try:
            return cls(key)
        except ValueError:
            raise InvalidSpec(f"unknown ansatz family {name!r}") from None

    @property
    def axes(self) -> tuple[GateKind, ...]:
        return _FAMILY_AXES[self]

    @property
    def linear(self) -> bool:
        return self in (Family.RX_CX_L, Family.RX_CX_L_MOD)


_FAMILY_AXES = {
    Family.RX_CX_L: (GateKind.RX,),
    Family.RX_CX_L_MOD: (GateKind.RX,),
    Family.RX_CX_A: (GateKind.RX,),
    Family.RX_RZ_CX_A: (GateKind.RX, GateKind.RZ),
    Family.RY_CX_A: (GateKind.RY,),
    Family.RX_RY_CX_A: (GateKind.RX, GateKind.RY),
    Family.RY_RZ_CX_A: (GateKind.RY, GateKind.RZ),
}


def linear_chain(n: int) -> list[tuple[int, int]]:
    """Canonical linear entanglement: ``CX(i+1 -> i)`` for every adjacent pair."""
    return [(i + 1, i) for i in range(n - 1)]


def alternating_pairs(n: int, layer: int) -> list[tuple[int, int]]:
    """Even layers couple (0,1),(2,3),...; odd layers (1,2),(3,4),...; control is the higher qubit."""
    return [(i + 1, i) for i in range(layer % 2, n - 1, 2)]


@dataclass(frozen=True)
class AnsatzSpec:
    family: Family
    n_qubits: int
    layers: int
    order: tuple[int, ...] | None = None  # permutation of chain positions (modified linear)

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if self.n_qubits < 2:
            raise InvalidSpec(f"n_qubits must be >= 2, got {self.n_qubits}")
        if self.layers < 0:
            raise InvalidSpec(f"layers must be >= 0, got {self.layers}")
        if self.order is not None:
            order = tuple(int(k) for k in self.order)
            if self.family is not Family.RX_CX_L_MOD:
                raise InvalidSpec("a CX order is only meaningful for rx-cx-l-mod")
            if sorted(order) != list(range(self.n_qubits - 1)):
                raise InvalidSpec(f"order {order} is not a permutation of 0..{self.n_qubits - 2}")
            object.__setattr__(self, "order", order)

    def entanglement_layer(self, j: int) -> list[tuple[int, int]]:
        if self.family.linear:
            chain = linear_chain(self.n_qubits)
            if self.order is not None:
                chain = [chain[k] for k in self.order]
            return chain
        return alternating_pairs(self.n_qubits, j)


def build_ansatz(spec: AnsatzSpec) -> Circuit:
    """``layers + 1`` rotation layers interleaved with ``layers`` entanglement layers.

    Parameter ids run qubit-major inside a rotation layer; with two axes per
    wire the pair sits next to each other (``RX`` first, then ``RZ``).
    """
    n, axes = spec.n_qubits, spec.family.axes
    gates: list[Gate] = []
    pid = 0
    for j in range(spec.layers + 1):
        for q in range(n):
            for axis in axes:
                gates.append(Gate(axis, (q,), ParamExpr.param(pid)))
                pid += 1
        if j < spec.layers:
            gates.extend(Gate(GateKind.CX, (c, t)) for c, t in spec.entanglement_layer(j))
    return Circuit(n, tuple(gates), pid)


def param_id(spec: AnsatzSpec, qubit: int, layer: int, axis: int = 0) -> int:
    """Raw parameter id of the ``axis``-th rotation on ``qubit`` in rotation layer ``layer``."""
    k = len(spec.family.axes)
    return (layer * spec.n_qubits + qubit) * k + axis


def count_resources(c: Circuit) -> tuple[int, int, int]:
    """``(raw params, CX gates, entanglement layers)``.

    An entanglement layer is a maximal run of CX gates in the gate sequence,
    plus one for each place where two rotation layers touch without CXs in
    between (alternating layers on two qubits have empty odd layers).
    """
    layers = 0
    in_cx = False
    seen: set[tuple[int, GateKind]] = set()
    for g in c.gates:
        if g.kind is GateKind.CX:
            if not in_cx:
                layers += 1
                seen.clear()
            in_cx = True
            continue
        in_cx = False
        key = (g.qubits[0], g.kind)
        if g.is_rotation and key in seen:
            layers += 1
            seen.clear()
        seen.add(key)
    return c.raw_param_count, c.cx_count, layers


def spec_resources(spec: AnsatzSpec) -> tuple[int, int, int]:
    c = build_ansatz(spec)
    return c.raw_param_count, c.cx_count, spec.layers


# -- JSON ------------------------------------------------------------------

def circuit_to_dict(c: Circuit) -> dict:
    gates = []
    for g in c.gates:
        entry = {"kind": g.kind.value, "qubits": list(g.qubits)}
        if g.is_rotation:
            entry["expr"] = g.expr.to_json()
        gates.append(entry)
    return {"n_qubits": c.n_qubits, "params": c.raw_param_count, "gates": gates}


def serialize(c: Circuit) -> str:
    """Canonical JSON (sorted keys, compact separators)."""
    return json.dumps(circuit_to_dict(c), sort_keys=True, separators=(",", ":"))


def _require(obj: Mapping, key: str, where: str):
    if not isinstance(obj, Mapping) or key not in obj:
        raise ParseError(f"missing required field in {where}", field=key)
    return obj[key]


def _as_int(value, field_name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"expected an integer, got {value!r}", field=field_name)
    return value


def circuit_from_dict(data: Mapping) -> Circuit:
    n = _as_int(_require(data, "n_qubits", "circuit"), "n_qubits")
    params = _as_int(_require(data, "params", "circuit"), "params")
    raw_gates = _require(data, "gates", "circuit")
    if not isinstance(raw_gates, list):
        raise ParseError("expected a list", field="gates")
    gates = []
    for i, entry in enumerate(raw_gates):
        where = f"gates[{i}]"
        kind_name = _require(entry, "kind", where)
        try:
            kind = GateKind(kind_name)
        except ValueError:
            raise ParseError(f"unknown gate kind {kind_name!r}", field=f"{where}.kind") from None
        qubits = _require(entry, "qubits", where)
        if not isinstance(qubits, list):
            raise ParseError("expected a list", field=f"{where}.qubits")
        qubits = tuple(_as_int(q, f"{where}.qubits") for q in qubits)
        expr = None
        if kind.is_rotation:
            raw = _require(entry, "expr", where)
            terms = _require(raw, "terms", f"{where}.expr")
            if not isinstance(terms, Mapping):
                raise ParseError("expected an object", field=f"{where}.expr.terms")
            try:
                parsed = tuple((int(k), _as_int(v, f"{where}.expr.terms")) for k, v in terms.items())
            except ValueError:
                raise ParseError("parameter ids must be integers", field=f"{where}.expr.terms") from None
            const = _as_int(raw.get("const_half_pi", 0), f"{where}.expr.const_half_pi")
            expr = ParamExpr(parsed, const)
        elif "expr" in entry:
            raise ParseError(f"{kind.value} must not carry an expression", field=f"{where}.expr")
        gates.append(Gate(kind, qubits, expr))
    try:
        return Circuit(n, tuple(gates), params)
    except (IndexOutOfRange, InvalidSpec) as exc:
        raise ParseError(str(exc), field="gates") from exc


def deserialize(text: str) -> Circuit:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    return circuit_from_dict(data)


def load_circuit(path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return deserialize(fh.read())


def save_circuit(c: Circuit, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(c) + "\n")


def random_theta(c: Circuit, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.0, 2 * math.pi, size=c.raw_param_count)


def concat(*circuits: Circuit) -> Circuit:
    n = circuits[0].n_qubits
    gates: list[Gate] = []
    for c in circuits:
        if c.n_qubits != n:
            raise ArityMismatch("circuits act on different qubit counts")
        gates.extend(c.gates)
    return Circuit(n, tuple(gates), max(c.raw_param_count for c in circuits))


def with_gates(c: Circuit, gates: Iterable[Gate]) -> Circuit:
    return Circuit(c.n_qubits, tuple(gates), c.raw_param_count)

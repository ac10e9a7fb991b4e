"""Rule-based parameter combination.

The engine works on gate angles: every rotation gate contributes one angle
``phi_g = expr_g(theta)``. A rule says the unitary depends on two angles only
through ``phi_g + sign * phi_h``; such pairs are joined in a union-find with
parity. The reduced circuit keeps the earliest gate of every class carrying
the signed sum of the member expressions.

Rules, in priority order:

* R1  two same-axis rotations adjacent on a wire.
* R2  same-axis rotations separated only by gates they commute with: an RX
      passes X gates and CX targets; RY and RZ pass X gates with a sign flip.
* R3  the periodic rule for RX-CX circuits with linear (any uniform chain
      order) or alternating entanglement: qubit ``i`` in rotation layer ``j``
      joins layer ``j + 2**ceil(log2(i + 1))``.
* R4  a run of at least four independent rotations on a wire with no
      two-qubit gate between them carries only three effective parameters.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import (
    AnsatzSpec,
    Circuit,
    Family,
    Gate,
    ParamExpr,
    build_ansatz,
    count_resources,
    linear_chain,
)
from .errors import NotAlternatingRxCx, UnsupportedFamily, UnsupportedGate
from .qsim import GateKind, circuit_unitary, euler_compose, euler_zxz, gate_matrix

SUPPORTED = frozenset(GateKind)


def period(i: int) -> int:
    """Periodic-rule stride for qubit ``i``: ``2**ceil(log2(i + 1))``."""
    return 1 << i.bit_length()


def effective_upper_bound_rxcx(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return (3 * n * n + 1) // 4


def effective_count_formula(family, n: int, L: int) -> int:
    """Closed-form counts for ``2L``-layer alternating ansatzes."""
    fam = Family.parse(family)
    if fam is Family.RY_CX_A:
        return (n - 1) * 2 * L
    if fam in (Family.RX_RZ_CX_A, Family.RX_RY_CX_A, Family.RY_RZ_CX_A):
        return (4 * n - 3) * L
    raise UnsupportedFamily(f"no closed form for {fam.value}")


def rxcx_linear_count(n: int, L: int) -> int:
    """Count predicted by the periodic rule for an ``L``-layer linear RX-CX ansatz."""
    return sum(min(L + 1, period(i)) for i in range(n))


# -- union-find over gate indices ------------------------------------------

class _ParityDSU:
    def __init__(self, size: int):
        self.parent = list(range(size))
        self.sign = [1] * size  # sign of node relative to its parent

    def find(self, x: int) -> tuple[int, int]:
        s = 1
        root = x
        while self.parent[root] != root:
            s *= self.sign[root]
            root = self.parent[root]
        # path compression
        cur, cs = x, s
        while self.parent[cur] != root and self.parent[cur] != cur:
            nxt = self.parent[cur]
            nsign = cs * self.sign[cur]
            self.parent[cur], self.sign[cur] = root, cs
            cur, cs = nxt, nsign
        return root, s

    def union(self, a: int, b: int, sign: int) -> bool:
        """Join so that ``phi_a + sign * phi_b`` is the shared quantity."""
        ra, sa = self.find(a)
        rb, sb = self.find(b)
        if ra == rb:
            return False
        # keep the earliest gate as root
        if rb < ra:
            ra, rb, sa, sb = rb, ra, sb, sa
        self.parent[rb] = ra
        self.sign[rb] = sa * sign * sb
        return True


# -- report types ------------------------------------------------------------

@dataclass(frozen=True)
class ParamClass:
    members: tuple[tuple[int, int], ...]  # (param id, sign)
    offset_half_pi: int = 0

    def to_json(self) -> dict:
        return {
            "members": [{"param": p, "sign": s} for p, s in self.members],
            "offset_half_pi": self.offset_half_pi,
        }


@dataclass(frozen=True)
class CombinationMap:
    classes: tuple[ParamClass, ...]
    unused: tuple[int, ...] = ()

    def class_of(self, pid: int) -> ParamClass | None:
        for cls in self.classes:
            if any(p == pid for p, _ in cls.members):
                return cls
        return None

    def apply(self, theta: Sequence[float]) -> np.ndarray:
        """Value of every effective parameter (signed class sums, offsets excluded)."""
        theta = np.asarray(theta, dtype=float)
        return np.array([sum(s * theta[p] for p, s in cls.members) for cls in self.classes])


@dataclass(frozen=True)
class RuleFiring:
    rule: str
    qubit: int
    gates: tuple[int, ...]

    def to_json(self) -> dict:
        return {"rule": self.rule, "qubit": self.qubit, "gates": list(self.gates)}


@dataclass(frozen=True)
class EulerRun:
    qubit: int
    gates: tuple[int, ...]  # indices into the reduced circuit
    rank: int
    max_error: float

    @property
    def saving(self) -> int:
        return max(0, self.rank - 3)


@dataclass(frozen=True)
class ReductionReport:
    resources: tuple[int, int, int]
    effective_count: int
    reduced: Circuit
    map: CombinationMap
    rules_fired: tuple[RuleFiring, ...]
    per_qubit: tuple[int, ...] = ()
    euler_runs: tuple[EulerRun, ...] = ()
    r3_family: str | None = None

    def to_dict(self) -> dict:
        p, cx, layers = self.resources
        return {
            "resources": {"params": p, "cx": cx, "layers": layers},
            "effective_count": self.effective_count,
            "per_qubit": list(self.per_qubit),
            "classes": [[{"param": q, "sign": s} for q, s in cls.members] for cls in self.map.classes],
            "offsets_half_pi": [cls.offset_half_pi for cls in self.map.classes],
            "unused_params": list(self.map.unused),
            "rules_fired": [r.to_json() for r in self.rules_fired],
            "euler_runs": [
                {"qubit": r.qubit, "gates": list(r.gates), "rank": r.rank, "max_error": r.max_error}
                for r in self.euler_runs
            ],
            "periodic_rule": self.r3_family,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


# -- R1 / R2 -----------------------------------------------------------------

def _commute_pass(gates: Sequence[Gate], live: Sequence[int], n: int,
                  dsu: _ParityDSU, log: list[RuleFiring]) -> bool:
    """One scan of the live gates; returns whether anything merged."""
    # per wire: (representative gate, axis, parity since it, nothing in between)
    open_: list[tuple[int, GateKind, int, bool] | None] = [None] * n
    changed = False
    for gi in live:
        g = gates[gi]
        if g.is_rotation:
            q = g.qubits[0]
            cur = open_[q]
            if cur is not None and cur[1] is g.kind:
                rep, axis, parity, adjacent = cur
                if dsu.union(rep, gi, parity):
                    changed = True
                    log.append(RuleFiring("R1" if adjacent else "R2", q, (rep, gi)))
                open_[q] = (rep, axis, parity, adjacent)
            else:
                open_[q] = (gi, g.kind, 1, True)
        elif g.kind is GateKind.X:
            q = g.qubits[0]
            cur = open_[q]
            if cur is not None:
                rep, axis, parity, _ = cur
                open_[q] = (rep, axis, parity if axis is GateKind.RX else -parity, False)
        elif g.kind is GateKind.CX:
            c, t = g.qubits
            open_[c] = None
            cur = open_[t]
            open_[t] = (cur[0], cur[1], cur[2], False) if cur and cur[1] is GateKind.RX else None
        else:
            raise UnsupportedGate(g.kind)
    return changed


# -- R3 recognition -------------------------------------------------------------

def _parse_linear_rxcx(c: Circuit) -> list[list[int]] | None:
    """Gate indices of RX per (layer, qubit) if ``c`` is a uniform-order linear RX-CX circuit."""
    n = c.n_qubits
    chain = set(linear_chain(n))
    layers: list[list[int]] = []
    order = None
    k = 0
    gates = c.gates
    while True:
        block = [None] * n
        for _ in range(n):
            if k >= len(gates) or gates[k].kind is not GateKind.RX or block[gates[k].qubits[0]] is not None:
                return None
            block[gates[k].qubits[0]] = k
            k += 1
        layers.append(block)
        if k == len(gates):
            return layers
        seq = tuple(g.qubits for g in gates[k:k + n - 1])
        if len(seq) != n - 1 or any(g.kind is not GateKind.CX for g in gates[k:k + n - 1]):
            return None
        if set(seq) != chain:
            return None
        if order is None:
            order = seq
        elif seq != order:
            return None
        k += n - 1


def _parse_alternating_rxcx(c: Circuit) -> tuple[int, list[list[int]]] | None:
    """``(layers, rx index grid)`` if ``c`` has exactly the RX-CX-A gate structure."""
    n = c.n_qubits
    n_rx = sum(1 for g in c.gates if g.kind is GateKind.RX)
    if n < 2 or n_rx == 0 or n_rx % n:
        return None
    L = n_rx // n - 1
    ref = build_ansatz(AnsatzSpec(Family.RX_CX_A, n, L))
    if len(ref.gates) != len(c.gates):
        return None
    grid = [[0] * n for _ in range(L + 1)]
    for i, (a, b) in enumerate(zip(ref.gates, c.gates)):
        if a.kind is not b.kind or a.qubits != b.qubits:
            return None
        if a.kind is GateKind.RX:
            pid = a.expr.params[0]
            grid[pid // n][pid % n] = i
    return L, grid


def _periodic_pairs(c: Circuit) -> tuple[str | None, list[tuple[int, int, int]]]:
    """Gate pairs ``(qubit, earlier, later)`` related by the periodic rule."""
    n = c.n_qubits
    pairs: list[tuple[int, int, int]] = []
    grid = _parse_linear_rxcx(c)
    if grid is not None:
        for j, block in enumerate(grid):
            for i in range(n):
                jj = j + period(i)
                if jj < len(grid):
                    pairs.append((i, block[i], grid[jj][i]))
        return "linear", pairs
    alt = _parse_alternating_rxcx(c)
    if alt is not None:
        L, grid = alt
        half = L // 2  # even-layer prefix reduces to a linear circuit of `half` layers
        for m in range(half + 1):
            for i in range(n):
                mm = m + period(i)
                if mm <= half:
                    pairs.append((i, grid[2 * m][i], grid[2 * mm][i]))
        return "alternating", pairs
    return None, pairs


# -- combination -------------------------------------------------------------

def _class_exprs(c: Circuit, dsu: _ParityDSU) -> dict[int, ParamExpr]:
    exprs: dict[int, ParamExpr] = {}
    for gi in c.rotation_indices():
        root, s = dsu.find(gi)
        e = c.gates[gi].expr.scaled(s)
        exprs[root] = exprs[root] + e if root in exprs else e
    return exprs


def _reduced_circuit(c: Circuit, dsu: _ParityDSU) -> tuple[Circuit, list[int]]:
    exprs = _class_exprs(c, dsu)
    gates, origin = [], []
    for gi, g in enumerate(c.gates):
        if g.is_rotation:
            root, _ = dsu.find(gi)
            if root != gi:
                continue
            expr = exprs[gi]
            if expr.is_constant and expr.const_half_pi % 8 == 0:
                continue  # angle is a multiple of 4*pi: exactly the identity
            g = Gate(g.kind, g.qubits, expr)
        gates.append(g)
        origin.append(gi)
    return Circuit(c.n_qubits, tuple(gates), c.raw_param_count), origin


def _forms(exprs: Sequence[ParamExpr], width: int) -> np.ndarray:
    m = np.zeros((len(exprs), width))
    for r, e in enumerate(exprs):
        for p, coeff in e.terms:
            m[r, p] = coeff
    return m


def _form_rank(exprs: Sequence[ParamExpr], width: int) -> int:
    if not exprs or width == 0:
        return 0
    return int(np.linalg.matrix_rank(_forms(exprs, width)))


def _euler_runs(reduced: Circuit, rng: np.random.Generator, trials: int = 10) -> list[EulerRun]:
    n = reduced.n_qubits
    runs: list[EulerRun] = []
    current: list[list[int]] = [[] for _ in range(n)]

    def close(q: int):
        idx = current[q]
        rot = [i for i in idx if reduced.gates[i].is_rotation and not reduced.gates[i].expr.is_constant]
        if len(rot) >= 4:
            rank = _form_rank([reduced.gates[i].expr for i in rot], reduced.raw_param_count)
            if rank >= 4:
                err = 0.0
                for _ in range(trials):
                    theta = rng.uniform(0, 2 * math.pi, reduced.raw_param_count)
                    u = np.eye(2, dtype=complex)
                    for i in idx:
                        g = reduced.gates[i]
                        angle = g.expr.evaluate(theta) if g.is_rotation else None
                        u = gate_matrix(g.kind, angle) @ u
                    err = max(err, float(np.linalg.norm(euler_compose(*euler_zxz(u)) - u)))
                runs.append(EulerRun(q, tuple(idx), rank, err))
        current[q] = []

    for i, g in enumerate(reduced.gates):
        if g.kind is GateKind.CX:
            for q in g.qubits:
                close(q)
        else:
            current[g.qubits[0]].append(i)
    for q in range(n):
        close(q)
    return runs


def _param_classes(reduced: Circuit) -> CombinationMap:
    live = [g.expr for g in reduced.gates if g.is_rotation]
    uses: dict[int, int] = {}
    for e in live:
        for p in e.params:
            uses[p] = uses.get(p, 0) + 1
    classes: list[ParamClass] = []
    seen: set[int] = set()
    for e in live:
        simple = all(abs(cf) == 1 and uses[p] == 1 for p, cf in e.terms)
        if simple and e.terms:
            classes.append(ParamClass(e.terms, e.const_half_pi))
            seen.update(e.params)
            continue
        for p in e.params:
            if p not in seen:
                classes.append(ParamClass(((p, 1),), 0))
                seen.add(p)
    classes.sort(key=lambda cls: cls.members[0][0])
    unused = tuple(p for p in range(reduced.raw_param_count) if p not in seen)
    return CombinationMap(tuple(classes), unused)


def combine_parameters(c: Circuit, *, seed: int = 0, periodic: bool = True) -> ReductionReport:
    """Apply R1-R4 to fixpoint and report the surviving parameters.

    ``periodic=False`` disables R3, which is useful for ablations.
    """
    for g in c.gates:
        if g.kind not in SUPPORTED:
            raise UnsupportedGate(f"unsupported gate {g.kind!r}")
    resources = count_resources(c)
    dsu = _ParityDSU(len(c.gates))
    log: list[RuleFiring] = []

    _commute_pass(c.gates, range(len(c.gates)), c.n_qubits, dsu, log)
    family = None
    if periodic:
        family, pairs = _periodic_pairs(c)
        for q, a, b in pairs:
            if dsu.union(a, b, 1):
                log.append(RuleFiring("R3", q, (a, b)))
    while True:
        _, origin = _reduced_circuit(c, dsu)
        if not _commute_pass(c.gates, origin, c.n_qubits, dsu, log):
            break

    reduced, origin = _reduced_circuit(c, dsu)
    cmap = _param_classes(reduced)
    rng = np.random.default_rng(seed)
    runs = _euler_runs(reduced, rng)
    for run in runs:
        log.append(RuleFiring("R4", run.qubit, tuple(origin[i] for i in run.gates)))

    live = [i for i, g in enumerate(reduced.gates) if g.is_rotation]
    rank = _form_rank([reduced.gates[i].expr for i in live], reduced.raw_param_count)
    saving = sum(r.saving for r in runs)
    effective = max(0, min(len(cmap.classes), rank) - saving)

    per_qubit = [0] * c.n_qubits
    for i in live:
        if not reduced.gates[i].expr.is_constant:
            per_qubit[reduced.gates[i].qubits[0]] += 1
    for r in runs:
        per_qubit[r.qubit] -= r.saving
    if sum(per_qubit) != effective:
        per_qubit = []  # shared parameters make per-wire attribution ambiguous

    return ReductionReport(
        resources=resources,
        effective_count=effective,
        reduced=reduced,
        map=cmap,
        rules_fired=tuple(log),
        per_qubit=tuple(per_qubit),
        euler_runs=tuple(runs),
        r3_family=family,
    )


# -- certificates --------------------------------------------------------------

def _frob(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.linalg.norm(u - v))


def shift_certificate(c: Circuit, cmap: CombinationMap, *, trials: int = 20,
                      rng: np.random.Generator | None = None,
                      classes: Sequence[int] | None = None) -> float:
    """Largest Frobenius change of the unitary under in-class shifts.

    For each class, every member ``b`` is paired with the first member ``a``;
    ``theta_a += s_a * delta`` and ``theta_b -= s_b * delta`` must leave the
    unitary unchanged.
    """
    rng = rng or np.random.default_rng(0)
    worst = 0.0
    picks = range(len(cmap.classes)) if classes is None else classes
    for k in picks:
        cls = cmap.classes[k]
        if len(cls.members) < 2:
            continue
        (a, sa) = cls.members[0]
        for b, sb in cls.members[1:]:
            for _ in range(trials):
                theta = rng.uniform(0, 2 * math.pi, c.raw_param_count)
                delta = rng.uniform(-math.pi, math.pi)
                shifted = theta.copy()
                shifted[a] += sa * delta
                shifted[b] -= sb * delta
                worst = max(worst, _frob(circuit_unitary(c, theta), circuit_unitary(c, shifted)))
    return worst


def reduced_equivalence_error(c: Circuit, report: ReductionReport, *, trials: int = 10,
                              rng: np.random.Generator | None = None) -> float:
    """Frobenius distance between original and reduced circuits at shared bindings."""
    rng = rng or np.random.default_rng(0)
    worst = 0.0
    for _ in range(trials):
        theta = rng.uniform(0, 2 * math.pi, c.raw_param_count)
        worst = max(worst, _frob(circuit_unitary(c, theta), circuit_unitary(report.reduced, theta)))
    return worst


# -- alternating to linear -------------------------------------------------------

@dataclass(frozen=True)
class LinearReduction:
    circuit: Circuit
    spec: AnsatzSpec
    param_map: tuple[ParamExpr, ...]  # output parameter k as an expression in input parameters

    def map_theta(self, theta: Sequence[float]) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return np.array([e.evaluate(theta) for e in self.param_map])


def reduce_alternating_to_linear(c: Circuit) -> LinearReduction:
    """Rewrite a ``2L``-layer RX-CX-A circuit as an ``L``-layer linear one.

    The output entanglement layer applies the even pairs and then the odd
    pairs, which is a fixed permutation of the linear chain. Rotations in odd
    alternating layers slide onto the neighbouring even layer: backwards for
    even qubits (through a CX target), forwards for odd qubits.
    """
    parsed = _parse_alternating_rxcx(c)
    if parsed is None:
        raise NotAlternatingRxCx("circuit does not have the RX-CX alternating structure")
    layers, grid = parsed
    if layers % 2:
        raise NotAlternatingRxCx(f"alternating layer count must be even, got {layers}")
    n, half = c.n_qubits, layers // 2
    order = tuple(list(range(0, n - 1, 2)) + list(range(1, n - 1, 2)))
    spec = AnsatzSpec(Family.RX_CX_L_MOD, n, half, order=order)
    out = build_ansatz(spec)

    def expr_at(i: int, layer: int) -> ParamExpr:
        return c.gates[grid[layer][i]].expr

    pmap: list[ParamExpr] = [ParamExpr()] * out.raw_param_count
    for m in range(half + 1):
        for i in range(n):
            e = expr_at(i, 2 * m)
            if i % 2 == 0 and 2 * m + 1 <= layers:
                e = e + expr_at(i, 2 * m + 1)
            if i % 2 == 1 and m >= 1:
                e = e + expr_at(i, 2 * m - 1)
            pmap[m * n + i] = e
    return LinearReduction(out, spec, tuple(pmap))

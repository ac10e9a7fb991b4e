"""Acceptance checks: one function per criterion, shared by the test suite and ``repro``.

Each check returns a :class:`CheckResult` with a pass flag, the measured
quantities and the wall time, so failures can be reported rather than raised.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .circuit import AnsatzSpec, Circuit, Family, Gate, ParamExpr, build_ansatz, linear_chain
from .entangle import (
    NotLinear,
    is_linear,
    layer_permutation,
    layer_to_gf2,
    order,
    synthesize_column_move,
)
from .qsim import CX_MATRIX, PAULI_X, GateKind, circuit_unitary, eigensolve, run_gates, rx
from .rank import expressive_rank, finite_difference_jacobian, unitary_jacobian
from .reduce import (
    combine_parameters,
    effective_count_formula,
    effective_upper_bound_rxcx,
    period,
    reduce_alternating_to_linear,
    shift_certificate,
)
from .vqa.observable import exact_minimum
from .vqa.optimize import OptimizerConfig, optimize
from .vqa.problems import bundled_hamiltonians, bundled_problem


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    seconds: float = 0.0
    budget: float = math.inf
    details: dict = field(default_factory=dict)

    @property
    def within_budget(self) -> bool:
        return self.seconds <= self.budget

    def to_dict(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "passed": self.passed,
            "within_budget": self.within_budget,
            "seconds": round(self.seconds, 3),
            "budget_seconds": self.budget,
            "details": self.details,
        }


def _timed(number: int, title: str, budget: float):
    def wrap(fn: Callable[..., tuple[bool, dict]]):
        def run(**kwargs) -> CheckResult:
            t0 = time.perf_counter()
            passed, details = fn(**kwargs)
            return CheckResult(number, title, bool(passed), time.perf_counter() - t0, budget, details)
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        run.number = number
        return run
    return wrap


def _frob(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b))


# -- 1: resource counts ----------------------------------------------------------------

# (benchmark, family, n, layers, params, cx)
RESOURCE_ROWS = [
    ("VQE-H2", "rx-cx-l", 4, 4, 20, 12),
    ("VQE-H2", "rx-cx-a", 4, 4, 20, 6),
    ("VQE-H2", "rx-rz-cx-a", 4, 4, 40, 6),
    ("VQE-LiH", "rx-cx-l", 6, 5, 36, 25),
    ("VQE-LiH", "rx-cx-a", 6, 5, 36, 13),
    ("VQE-LiH", "rx-rz-cx-a", 6, 5, 72, 13),
    ("VQE-BeH2", "rx-cx-l", 8, 5, 48, 35),
    ("VQE-BeH2", "rx-cx-a", 8, 5, 48, 18),
    ("VQE-BeH2", "rx-rz-cx-a", 8, 5, 96, 18),
    ("VQE-HF", "rx-cx-l", 10, 5, 60, 45),
    ("VQE-HF", "rx-cx-a", 10, 5, 60, 23),
    ("VQE-HF", "rx-rz-cx-a", 10, 5, 120, 23),
    ("QAOA-MC", "rx-cx-l", 4, 4, 20, 12),
    ("QAOA-MC", "rx-cx-a", 4, 4, 20, 6),
    ("QAOA-VC", "rx-cx-l", 6, 5, 36, 25),
    ("QAOA-VC", "rx-cx-a", 6, 5, 36, 13),
    ("QAOA-TSP", "rx-cx-l", 9, 5, 54, 40),
    ("QAOA-TSP", "rx-cx-a", 9, 5, 54, 20),
    ("QAOA-TSP", "rx-rz-cx-a", 9, 5, 108, 20),
]

# rows whose published numbers no builder convention reproduces together with the rest
FLAGGED_ROWS = [
    ("QAOA-MC", "rx-rz-cx-a", 4, 4, 20, 6),
    ("QAOA-VC", "rx-rz-cx-a", 6, 5, 72, 25),
    ("VQE-H2", "rx-cx-a", 4, 8, 40, 12),
    ("VQE-LiH", "rx-cx-a", 6, 10, 72, 25),
    ("VQE-BeH2", "rx-cx-a", 8, 10, 96, 35),
    ("VQE-HF", "rx-cx-a", 10, 10, 120, 45),
    ("QAOA-MC", "rx-cx-a", 4, 8, 40, 12),
    ("QAOA-VC", "rx-cx-a", 6, 10, 72, 25),
    ("QAOA-TSP", "rx-cx-a", 9, 10, 108, 40),
]


def _resource_row(row) -> dict:
    name, fam, n, L, params, cx = row
    c = build_ansatz(AnsatzSpec(fam, n, L))
    return {"benchmark": name, "family": fam, "n": n, "layers": L,
            "expected": [params, cx], "built": [c.raw_param_count, c.cx_count],
            "match": (c.raw_param_count, c.cx_count) == (params, cx)}


@_timed(1, "resource counts", 1.0)
def check_resource_counts():
    rows = [_resource_row(r) for r in RESOURCE_ROWS]
    flagged = [_resource_row(r) for r in FLAGGED_ROWS]
    return all(r["match"] for r in rows), {"rows": rows, "flagged": flagged}


# -- 2: X-rule identities ------------------------------------------------------------

def x_rule_circuit() -> Circuit:
    """``RX(t0)`` on the target, ``CX(1 -> 0)``, ``RX(t1)`` on the target."""
    gates = (Gate(GateKind.RX, (0,), ParamExpr.param(0)),
             Gate(GateKind.CX, (1, 0)),
             Gate(GateKind.RX, (0,), ParamExpr.param(1)))
    return Circuit(2, gates, 2)


@_timed(2, "X-rule identities and two-parameter merge", 1.0)
def check_x_rule(trials: int = 100, seed: int = 2):
    eye = np.eye(2)
    xi, ix, xx = np.kron(PAULI_X, eye), np.kron(eye, PAULI_X), np.kron(PAULI_X, PAULI_X)
    errs = {
        "cx_xi_eq_xx_cx": _frob(CX_MATRIX @ xi, xx @ CX_MATRIX),
        "xx_cx_eq_xi_cx_ix": _frob(xx @ CX_MATRIX, xi @ CX_MATRIX @ ix),
    }
    rng = np.random.default_rng(seed)
    merge = 0.0
    for _ in range(trials):
        t1, t2 = rng.uniform(0, 2 * math.pi, 2)
        lhs = np.kron(eye, rx(t2)) @ CX_MATRIX @ np.kron(eye, rx(t1))
        rhs = np.kron(eye, rx(t1 + t2)) @ CX_MATRIX
        merge = max(merge, _frob(lhs, rhs))
    errs["rx_merge_across_target"] = merge
    c = x_rule_circuit()
    report = combine_parameters(c)
    cert = shift_certificate(c, report.map, trials=trials, rng=rng)
    classes = [list(cls.members) for cls in report.map.classes]
    ok = (max(errs.values()) < 1e-12 and report.effective_count == 1
          and classes == [[(0, 1), (1, 1)]] and cert < 1e-12)
    return ok, {"identity_errors": errs, "effective_count": report.effective_count,
                "classes": classes, "shift_certificate": cert}


# -- 3: RX-CX linear bound and periods ---------------------------------------------------

@_timed(3, "linear RX-CX bound and per-qubit periods", 120.0)
def check_linear_bound(n_range=range(2, 7), layer_range=range(1, 13), trials: int = 20,
                       seed: int = 3):
    rng = np.random.default_rng(seed)
    violations, worst_cert, grid = [], 0.0, {}
    for n in n_range:
        bound = effective_upper_bound_rxcx(n)
        for L in layer_range:
            c = build_ansatz(AnsatzSpec(Family.RX_CX_L, n, L))
            report = combine_parameters(c)
            grid[f"{n},{L}"] = report.effective_count
            if report.effective_count > bound:
                violations.append((n, L, report.effective_count, bound))
            worst_cert = max(worst_cert, shift_certificate(c, report.map, trials=trials, rng=rng))
    fig = combine_parameters(build_ansatz(AnsatzSpec(Family.RX_CX_L, 4, 8)))
    periods = list(fig.per_qubit)
    pattern_ok = tuple(periods) == (1, 2, 4, 4) == tuple(period(q) for q in range(4))
    ok = not violations and pattern_ok and worst_cert < 1e-9
    return ok, {"violations": violations, "counts": grid, "periods_n4": periods,
                "max_shift_certificate": worst_cert}


# -- 4: CX order invariance ----------------------------------------------------------------

@_timed(4, "CX order invariance", 60.0)
def check_order_invariance(sizes=(3, 4, 5), orders: int = 20, layers: int = 8, seed: int = 4):
    rng = np.random.default_rng(seed)
    out, ok = {}, True
    for n in sizes:
        base = combine_parameters(build_ansatz(AnsatzSpec(Family.RX_CX_L, n, layers))).effective_count
        counts = []
        for _ in range(orders):
            perm = tuple(int(k) for k in rng.permutation(n - 1))
            spec = AnsatzSpec(Family.RX_CX_L_MOD, n, layers, order=perm)
            counts.append(combine_parameters(build_ansatz(spec)).effective_count)
        ok &= all(k == base for k in counts)
        out[n] = {"canonical": base, "permuted": counts}
    return ok, out


# -- 5: alternating to linear ----------------------------------------------------------------

@_timed(5, "alternating-to-linear reduction", 300.0)
def check_alternating_reduction(cases=((3, 4), (4, 8), (5, 6)), trials: int = 50, seed: int = 5):
    rng = np.random.default_rng(seed)
    out, ok = [], True
    for n, two_l in cases:
        alt = build_ansatz(AnsatzSpec(Family.RX_CX_A, n, two_l))
        red = reduce_alternating_to_linear(alt)
        dist = 0.0
        for _ in range(trials):
            theta = rng.uniform(0, 2 * math.pi, alt.raw_param_count)
            dist = max(dist, _frob(circuit_unitary(alt, theta),
                                   circuit_unitary(red.circuit, red.map_theta(theta))))
        r_alt = expressive_rank(alt, "unitary", 3, seed=seed).rank
        r_lin = expressive_rank(red.circuit, "unitary", 3, seed=seed).rank
        case_ok = dist < 1e-10 and r_alt == r_lin
        ok &= case_ok
        out.append({"n": n, "alternating_layers": two_l, "max_distance": dist,
                    "rank_alternating": r_alt, "rank_linear": r_lin, "passed": case_ok})
    return ok, {"cases": out}


# -- 6: closed-form counts -------------------------------------------------------------------

FORMULA_FAMILIES = (Family.RX_RZ_CX_A, Family.RX_RY_CX_A, Family.RY_RZ_CX_A, Family.RY_CX_A)


@_timed(6, "closed-form effective counts", 300.0)
def check_formula_counts(sizes=(2, 4, 6), halves=(1, 2, 3), seed: int = 6):
    rows, ok = [], True
    for fam in FORMULA_FAMILIES:
        for n in sizes:
            for L in halves:
                c = build_ansatz(AnsatzSpec(fam, n, 2 * L))
                count = combine_parameters(c).effective_count
                formula = effective_count_formula(fam, n, L)
                rank = expressive_rank(c, "unitary", 3, seed=seed).rank
                row_ok = count == formula and rank <= formula
                ok &= row_ok
                rows.append({"family": fam.value, "n": n, "L": L, "layers": 2 * L,
                             "rule_count": count, "formula": formula, "rank": rank,
                             "rank_le_rule_count": rank <= count, "passed": row_ok})
    return ok, {"rows": rows}


# -- 7: order of linear-chain layers -------------------------------------------------------------

@_timed(7, "entanglement layer order", 10.0)
def check_layer_order(sizes=range(2, 6)):
    out, ok = [], True
    for n in sizes:
        layer = linear_chain(n)
        k = order(layer_to_gf2(layer, n))
        bound = [(GateKind.CX, pair, None) for pair in layer]
        e = run_gates(np.eye(1 << n, dtype=complex), bound)
        eye = np.eye(1 << n)
        power = np.eye(1 << n, dtype=complex)
        early = []
        for j in range(1, k + 1):
            power = e @ power
            if j < k and np.array_equal(power, eye):
                early.append(j)
        exact = bool(np.array_equal(power, eye))
        ok &= exact and not early
        out.append({"n": n, "order": k, "E^k == I": exact, "early_identity": early})
    return ok, {"layers": out}


# -- 8: column moves and linearity ------------------------------------------------------------------

def _random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@_timed(8, "column moves and non-linear permutations", 30.0)
def check_column_moves(samples: int = 200, seed: int = 8):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(2, 7))
        i, j = (int(v) for v in rng.integers(2, (1 << n) + 1, size=2))
        layer = synthesize_column_move(n, i, j)
        u = _random_unitary(1 << n, rng)
        e = run_gates(np.eye(1 << n, dtype=complex), [(GateKind.CX, pair, None) for pair in layer])
        ue = u @ e
        worst = max(worst, float(np.max(np.abs(ue[:, j - 1] - u[:, i - 1]))))
    n = 3
    swap = list(range(8))
    a, b = (1 << (n - 1)), (1 << (n - 1)) + 1
    swap[a], swap[b] = swap[b], swap[a]
    verdict = is_linear(swap)
    witness_ok = False
    witness = None
    if isinstance(verdict, NotLinear):
        x, y = verdict.x, verdict.y
        witness = {"x": x, "y": y, "perm(x^y)": swap[x ^ y], "perm(x)^perm(y)": swap[x] ^ swap[y]}
        witness_ok = swap[x ^ y] != swap[x] ^ swap[y]
    linear_count = sum(
        1 for p in itertools.permutations(range(1, 8))
        if not isinstance(is_linear((0,) + p), NotLinear)
    )
    ok = worst < 1e-12 and witness_ok and linear_count == 168
    return ok, {"max_column_error": worst, "witness": witness, "linear_permutations_n3": linear_count}


# -- 9: QAOA tolerance ----------------------------------------------------------------------------------

QAOA_CASES = (("maxcut_4", 4, 4), ("vertex_cover_6", 6, 5), ("tsp_3", 9, 5))
QAOA_FAMILIES = (Family.RX_CX_L, Family.RX_CX_A, Family.RX_RZ_CX_A)
# per-restart evaluations per parameter; the penalty-dominated TSP landscape needs
# several times the default before the simplex settles
QAOA_EVALS_PER_PARAM = 4000


@_timed(9, "QAOA error below 1e-4", 900.0)
def check_qaoa(restarts: int = 20, seed: int = 9, jobs: int = 1, tol: float = 1e-4,
               evals_per_param: int = QAOA_EVALS_PER_PARAM):
    rows, ok = [], True
    for name, n, L in QAOA_CASES:
        problem = bundled_problem(name)
        exact = exact_minimum(problem.observable)
        for fam in QAOA_FAMILIES:
            c = build_ansatz(AnsatzSpec(fam, n, L))
            cfg = OptimizerConfig(restarts=restarts, seed=seed, target_epsilon=tol, jobs=jobs,
                                  max_evals=evals_per_param * c.raw_param_count)
            res = optimize(c, problem.observable, cfg, exact=exact)
            row_ok = res.epsilon < tol
            ok &= row_ok
            rows.append({"problem": name, "family": fam.value, "layers": L,
                         "optimal_cost": problem.cost(exact.energy), "cost": problem.cost(res.E_a),
                         "epsilon": res.epsilon, "restarts_used": res.restarts,
                         "evaluations": res.iterations, "passed": row_ok})
    return ok, {"rows": rows}


# -- 10: VQE ordering -----------------------------------------------------------------------------------

@_timed(10, "RX-RZ-CX-A beats RX-CX-L on bundled Hamiltonians", 1800.0)
def check_vqe_ordering(layers: int = 2, seeds: int = 5, restarts: int = 2, jobs: int = 1,
                       names: tuple[str, ...] | None = None):
    names = tuple(bundled_hamiltonians()) if names is None else names
    rows, ok = [], True
    for fname in names:
        problem = bundled_problem(fname)
        exact = exact_minimum(problem.observable)
        medians = {}
        for fam in (Family.RX_CX_L, Family.RX_RZ_CX_A):
            c = build_ansatz(AnsatzSpec(fam, problem.observable.n, layers))
            eps = [optimize(c, problem.observable,
                            OptimizerConfig(restarts=restarts, seed=s, jobs=jobs), exact=exact).epsilon
                   for s in range(seeds)]
            medians[fam.value] = {"median": float(np.median(eps)), "all": eps}
        row_ok = medians["rx-rz-cx-a"]["median"] < medians["rx-cx-l"]["median"]
        ok &= row_ok
        rows.append({"hamiltonian": fname, "n": problem.observable.n, "ground_energy": exact.energy,
                     "epsilon": medians, "passed": row_ok})
    ok &= len(rows) >= 3 and {4, 6} <= {r["n"] for r in rows}
    return ok, {"layers": layers, "rows": rows}


# -- 11: numerical hygiene ----------------------------------------------------------------------------

@_timed(11, "Jacobian and eigensolver accuracy", 120.0)
def check_numerics(seed: int = 11, matrices: int = 20):
    rng = np.random.default_rng(seed)
    jac_err = 0.0
    for fam in Family:
        for _ in range(2):
            c = build_ansatz(AnsatzSpec(fam, 3, 2))
            theta = rng.uniform(0, 2 * math.pi, c.raw_param_count)
            a = unitary_jacobian(c, theta)
            f = finite_difference_jacobian(c, theta)
            jac_err = max(jac_err, float(np.max(np.abs(a - f) / (1 + np.abs(a)))))
    residual = 0.0
    dims = [int(d) for d in rng.choice([2, 4, 8, 16, 32, 64, 128, 256], size=matrices)]
    dims[-1] = 256
    for dim in dims:
        z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = (z + z.conj().T) / 2
        w, v = eigensolve(h)
        res = np.linalg.norm(h @ v - v * w) / np.linalg.norm(h, 2)
        residual = max(residual, float(res))
    ok = jac_err < 1e-7 and residual < 1e-8
    return ok, {"jacobian_relative_error": jac_err, "eigen_residual_over_norm": residual,
                "dims": dims}


ALL_CHECKS = [
    check_resource_counts,
    check_x_rule,
    check_linear_bound,
    check_order_invariance,
    check_alternating_reduction,
    check_formula_counts,
    check_layer_order,
    check_column_moves,
    check_qaoa,
    check_vqe_ordering,
    check_numerics,
]


def run_all(only: set[int] | None = None, jobs: int = 1) -> list[CheckResult]:
    results = []
    for check in ALL_CHECKS:
        if only and check.number not in only:
            continue
        kwargs = {"jobs": jobs} if check.number in (9, 10) else {}
        results.append(check(**kwargs))
    return results

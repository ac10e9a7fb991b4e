"""Energy minimization over circuit parameters with multistart local search."""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from numba import njit
from scipy.optimize import minimize

from ..circuit import Circuit
from ..errors import ArityMismatch, ValidationError
from ..qsim import GateKind, _cx_perm
from .observable import ExactMinimum, Observable, exact_minimum

METHODS = ("nelder-mead", "cobyla")


@njit(cache=True, fastmath=True)
def _run_ops(psi, kinds, qubits, starts, chain, angles, axes, perms):
    """Apply fused single-qubit runs (kind 0) and basis permutations (kind 1) in order.

    ``chain`` holds rotation slots (axis 0/1/2 for X/Y/Z) or -1 for a Pauli X.
    """
    dim = psi.shape[0]
    buf = np.empty_like(psi)
    for o in range(kinds.shape[0]):
        if kinds[o] == 1:
            perm = perms[qubits[o]]
            for x in range(dim):
                buf[x] = psi[perm[x]]
            psi, buf = buf, psi
            continue
        u00, u01, u10, u11 = 1.0 + 0j, 0j, 0j, 1.0 + 0j
        for i in range(starts[o], starts[o + 1]):
            k = chain[i]
            if k < 0:
                g00, g01, g10, g11 = 0j, 1.0 + 0j, 1.0 + 0j, 0j
            else:
                co, si = math.cos(angles[k] / 2), math.sin(angles[k] / 2)
                if axes[k] == 0:
                    g00, g01, g10, g11 = co + 0j, -1j * si, -1j * si, co + 0j
                elif axes[k] == 1:
                    g00, g01, g10, g11 = co + 0j, -si + 0j, si + 0j, co + 0j
                else:
                    g00, g01, g10, g11 = co - 1j * si, 0j, 0j, co + 1j * si
            u00, u01, u10, u11 = (g00 * u00 + g01 * u10, g00 * u01 + g01 * u11,
                                  g10 * u00 + g11 * u10, g10 * u01 + g11 * u11)
        stride = 1 << qubits[o]
        for hi in range(0, dim, 2 * stride):
            for lo in range(hi, hi + stride):
                a, b = psi[lo], psi[lo + stride]
                psi[lo] = u00 * a + u01 * b
                psi[lo + stride] = u10 * a + u11 * b
    return psi


class CompiledCircuit:
    """Statevector evaluator that fuses single-qubit gates between CXs.

    Single-qubit gates on a wire are multiplied into one 2x2 matrix per run
    between CXs, consecutive CXs become one basis permutation, every angle
    comes from one matrix-vector product ``A theta + b``, and the op list runs
    in a compiled loop.
    """

    def __init__(self, c: Circuit):
        self.n = c.n_qubits
        self.n_params = c.raw_param_count
        rot = [i for i, g in enumerate(c.gates) if g.is_rotation]
        slot = {gi: k for k, gi in enumerate(rot)}
        self._coef = np.zeros((len(rot), c.raw_param_count))
        self._const = np.zeros(len(rot))
        kinds = []
        for k, gi in enumerate(rot):
            e = c.gates[gi].expr
            for p, cf in e.terms:
                self._coef[k, p] = cf
            self._const[k] = e.const_half_pi * math.pi / 2
            kinds.append(c.gates[gi].kind)
        self._kinds = np.array([{GateKind.RX: 0, GateKind.RY: 1, GateKind.RZ: 2}[kd] for kd in kinds], dtype=np.int64)

        # ops: ("u", qubit, [slot or -1 for X, ...]) or ("p", permutation)
        ops: list[tuple] = []
        pending: dict[int, list[int]] = {}

        def flush(q: int):
            chain = pending.pop(q, None)
            if chain:
                ops.append(("u", q, tuple(chain)))

        for gi, g in enumerate(c.gates):
            if g.kind is GateKind.CX:
                for q in sorted(pending):
                    flush(q)
                perm = _cx_perm(self.n, *g.qubits)
                if ops and ops[-1][0] == "p":
                    ops[-1] = ("p", ops[-1][1][perm])
                else:
                    ops.append(("p", perm))
            else:
                pending.setdefault(g.qubits[0], []).append(slot[gi] if g.is_rotation else -1)
        for q in sorted(pending):
            flush(q)

        # flatten for the compiled kernel; a permutation op stores its index in `qubits`
        perms = [op[1] for op in ops if op[0] == "p"]
        self._perms = (np.array(perms, dtype=np.int64) if perms
                       else np.zeros((0, 1 << self.n), dtype=np.int64))
        op_kind, op_arg, starts, chain = [], [], [0], []
        n_perm = 0
        for op in ops:
            if op[0] == "p":
                op_kind.append(1)
                op_arg.append(n_perm)
                n_perm += 1
            else:
                op_kind.append(0)
                op_arg.append(op[1])
                chain.extend(op[2])
            starts.append(len(chain))
        self._op_kind = np.array(op_kind, dtype=np.int64)
        self._op_arg = np.array(op_arg, dtype=np.int64)
        self._starts = np.array(starts, dtype=np.int64)
        self._chain = np.array(chain, dtype=np.int64)

    def state(self, theta: Sequence[float]) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ArityMismatch(f"expected {self.n_params} parameters, got {theta.shape}")
        psi = np.zeros(1 << self.n, dtype=complex)
        psi[0] = 1.0
        angles = self._coef @ theta + self._const
        return _run_ops(psi, self._op_kind, self._op_arg, self._starts, self._chain,
                        angles, self._kinds, self._perms)


def energy_function(c: Circuit, obs: Observable) -> Callable[[np.ndarray], float]:
    if c.n_qubits != obs.n:
        raise ArityMismatch(f"circuit has {c.n_qubits} qubits, observable {obs.n}")
    sim = CompiledCircuit(c)
    if obs.is_diagonal:
        diag = obs.diagonal()

        def f(theta):
            psi = sim.state(theta)
            return float(np.dot(diag, psi.real ** 2 + psi.imag ** 2))
    else:
        def f(theta):
            return obs.expectation(sim.state(theta), check=False)
    return f


# -- configuration and results ------------------------------------------------

@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 20
    method: str = "nelder-mead"
    max_evals: int | None = None  # per restart; default 500 * P
    fatol: float = 1e-9
    target_epsilon: float | None = None  # stop restarting once reached
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValidationError("restarts must be >= 1")
        if self.method not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}")
        if self.max_evals is not None and self.max_evals < 1:
            raise ValidationError("max_evals must be >= 1")
        if self.jobs < 1:
            raise ValidationError("jobs must be >= 1")

    def evals_for(self, n_params: int) -> int:
        return self.max_evals if self.max_evals is not None else 500 * max(n_params, 1)


@dataclass(frozen=True)
class RestartResult:
    index: int
    energy: float
    evals: int
    converged: bool
    theta: tuple[float, ...]


@dataclass(frozen=True)
class RunResult:
    E_a: float
    E: float
    epsilon: float
    iterations: int  # function evaluations summed over restarts
    restarts: int
    seed: int
    wall_time: float
    theta: tuple[float, ...]
    best_restart: int
    restart_energies: tuple[float, ...] = ()
    converged: tuple[bool, ...] = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["theta"] = list(self.theta)
        d["restart_energies"] = list(self.restart_energies)
        d["converged"] = list(self.converged)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


class _Stop(Exception):
    pass


def _local_search(c: Circuit, obs: Observable, x0: np.ndarray, cfg: OptimizerConfig,
                  index: int, stop_below: float | None) -> RestartResult:
    f = energy_function(c, obs)
    budget = cfg.evals_for(c.raw_param_count)
    best = [math.inf, x0]
    count = [0]

    def tracked(x):
        if count[0] >= budget:
            raise _Stop
        count[0] += 1
        val = f(x)
        if val < best[0]:
            best[0], best[1] = val, np.array(x, dtype=float)
        if stop_below is not None and val <= stop_below:
            raise _Stop
        return val

    converged = False
    try:
        if cfg.method == "nelder-mead":
            # the spread test on simplex values is the only stopping rule
            res = minimize(tracked, x0, method="Nelder-Mead",
                           options={"adaptive": True, "fatol": cfg.fatol, "xatol": np.inf,
                                    "maxfev": budget + 1, "maxiter": 10 * budget})
        else:
            res = minimize(tracked, x0, method="COBYLA",
                           options={"maxiter": budget + 1, "rhobeg": 0.5, "tol": cfg.fatol})
        converged = bool(res.success)
    except _Stop:
        converged = stop_below is not None and best[0] <= stop_below
    return RestartResult(index, float(best[0]), count[0], converged,
                         tuple(float(v) for v in best[1]))


def _restart_worker(args) -> RestartResult:
    c, obs, x0, cfg, index, stop_below = args
    return _local_search(c, obs, x0, cfg, index, stop_below)


def start_points(n_params: int, cfg: OptimizerConfig) -> list[np.ndarray]:
    """One uniform draw in ``[0, 2pi)^P`` per restart, each from its own spawned seed."""
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    return [np.random.default_rng(ch).uniform(0.0, 2 * math.pi, n_params) for ch in children]


def optimize(c: Circuit, obs: Observable, cfg: OptimizerConfig | None = None, *,
             exact: ExactMinimum | float | None = None) -> RunResult:
    """Best energy over ``cfg.restarts`` local searches and its error against the exact minimum.

    With ``cfg.target_epsilon`` set, remaining restarts are skipped once a
    restart reaches ``E + target_epsilon``; restarts run in batches of
    ``cfg.jobs`` so results do not depend on scheduling.
    """
    cfg = cfg or OptimizerConfig()
    if c.n_qubits != obs.n:
        raise ArityMismatch(f"circuit has {c.n_qubits} qubits, observable {obs.n}")
    t0 = time.perf_counter()
    if exact is None:
        exact = exact_minimum(obs)
    e_min = exact.energy if isinstance(exact, ExactMinimum) else float(exact)
    stop_below = None if cfg.target_epsilon is None else e_min + 0.5 * cfg.target_epsilon

    P = c.raw_param_count
    results: list[RestartResult] = []
    if P == 0:
        e = energy_function(c, obs)(np.zeros(0))
        results.append(RestartResult(0, e, 1, True, ()))
    else:
        starts = start_points(P, cfg)
        pool = ProcessPoolExecutor(cfg.jobs) if cfg.jobs > 1 else None
        try:
            for lo in range(0, cfg.restarts, cfg.jobs):
                batch = [(c, obs, starts[k], cfg, k, stop_below)
                         for k in range(lo, min(lo + cfg.jobs, cfg.restarts))]
                if pool is None:
                    results.extend(_restart_worker(b) for b in batch)
                else:
                    results.extend(pool.map(_restart_worker, batch))
                if stop_below is not None and min(r.energy for r in results) <= stop_below:
                    break
        finally:
            if pool is not None:
                pool.shutdown()
    best = min(results, key=lambda r: (r.energy, r.index))
    return RunResult(
        E_a=best.energy,
        E=e_min,
        epsilon=abs(best.energy - e_min),
        iterations=sum(r.evals for r in results),
        restarts=len(results),
        seed=cfg.seed,
        wall_time=time.perf_counter() - t0,
        theta=best.theta,
        best_restart=best.index,
        restart_energies=tuple(r.energy for r in results),
        converged=tuple(r.converged for r in results),
    )

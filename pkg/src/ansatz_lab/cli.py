"""``ansatz-lab`` command line.

Exit codes: 0 success, 2 invalid input, 3 failed check, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .circuit import (
    AnsatzSpec,
    Circuit,
    alternating_pairs,
    build_ansatz,
    count_resources,
    linear_chain,
    load_circuit,
    save_circuit,
)
from .entangle import (
    NotLinear,
    format_layer,
    is_linear,
    layer_permutation,
    layer_to_gf2,
    order,
    parse_layer,
    synthesize_column_move,
)
from .errors import AnsatzLabError, CapExceeded, ParseError, ValidationError
from .qsim import GateKind, run_gates
from .rank import DEFAULT_REL_TOL, MODES, expressive_rank
from .reduce import combine_parameters, reduce_alternating_to_linear, shift_certificate
from .validation import check_families, check_int, check_real
from .vqa.observable import exact_minimum, load_hamiltonian
from .vqa.optimize import METHODS, OptimizerConfig, optimize
from .vqa.problems import (
    bundled_problem,
    encode_maxcut,
    encode_tsp,
    encode_vertex_cover,
    hamiltonian_problem,
    load_distances,
    load_graph,
)

EXIT_OK, EXIT_INVALID, EXIT_CHECK, EXIT_IO = 0, 2, 3, 4
SEED_ENV = "ANSATZ_LAB_SEED"


class _Output:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def say(self, text: str = "") -> None:
        if not self.quiet:
            print(text)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _envelope(command: str, args: argparse.Namespace, result: dict) -> dict:
    config = {k: v for k, v in vars(args).items() if k != "handler" and not callable(v)}
    return {"tool": "ansatz-lab", "version": __version__, "command": command,
            "config": config, "result": result}


def _emit(report: dict, out: str | None, printer: _Output, *, json_stdout: bool = False) -> None:
    text = json.dumps(report, sort_keys=True, indent=2, default=str)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    if json_stdout:
        print(text)


# -- build -----------------------------------------------------------------------

def cmd_build(args, printer: _Output) -> int:
    order_ = tuple(int(s) for s in args.order.split(",")) if args.order else None
    spec = AnsatzSpec(args.family, args.n, args.layers, order=order_)
    c = build_ansatz(spec)
    params, cx, layers = count_resources(c)
    if args.output:
        save_circuit(c, args.output)
    printer.say(f"params={params} cx={cx} layers={layers}")
    return EXIT_OK


# -- reduce ----------------------------------------------------------------------

def cmd_reduce(args, printer: _Output) -> int:
    c = load_circuit(args.circuit)
    report = combine_parameters(c, seed=args.seed, periodic=not args.no_periodic)
    result = report.to_dict()
    status = EXIT_OK
    if args.check:
        err = shift_certificate(c, report.map, rng=np.random.default_rng(args.seed))
        result["certificate"] = {"max_error": err, "tolerance": args.tolerance,
                                 "passed": err < args.tolerance}
        if err >= args.tolerance:
            status = EXIT_CHECK
    _emit(_envelope("reduce", args, result), args.output, printer, json_stdout=args.json)
    if not args.json:
        p, cx, layers = report.resources
        printer.say(f"params={p} cx={cx} layers={layers} effective={report.effective_count}")
        if report.per_qubit:
            printer.say("per-qubit classes: " + " ".join(str(k) for k in report.per_qubit))
        if args.check:
            cert = result["certificate"]
            printer.say(f"certificate max error {cert['max_error']:.3e}: "
                        f"{'pass' if cert['passed'] else 'FAIL'}")
    return status


# -- rank ------------------------------------------------------------------------

def _rank_of(c: Circuit, args):
    return expressive_rank(c, args.mode, args.seeds, rel_tol=args.rel_tol, seed=args.seed)


def cmd_rank(args, printer: _Output) -> int:
    check_int(args.seeds, "seeds", minimum=1)
    check_real(args.rel_tol, "rel-tol", low=0.0, high=1e-2, low_open=True)
    c = load_circuit(args.circuit)
    report = _rank_of(c, args)
    result = {"rank": report.to_dict()}
    printer.say(f"rank={report.rank} params={c.raw_param_count} mode={report.mode}")
    if report.seeds_disagree:
        printer.say(f"warning: per-seed ranks differ {list(report.ranks)}")
    other = None
    if args.compare:
        other = load_circuit(args.compare)
    elif args.against_linear:
        other = reduce_alternating_to_linear(c).circuit
    status = EXIT_OK
    if other is not None:
        other_report = _rank_of(other, args)
        equal = other_report.rank == report.rank
        result["comparison"] = {"rank": other_report.to_dict(), "equal": equal}
        printer.say(f"{'EQUAL' if equal else 'DIFFERENT'}: {report.rank} vs {other_report.rank}")
        if not equal:
            status = EXIT_CHECK
    _emit(_envelope("rank", args, result), args.output, printer, json_stdout=args.json)
    return status


# -- entangle --------------------------------------------------------------------

def _named_layer(name: str, n: int) -> list[tuple[int, int]]:
    if name == "linear":
        return linear_chain(n)
    if name in ("alternating", "alternating-even"):
        return alternating_pairs(n, 0)
    if name == "alternating-odd":
        return alternating_pairs(n, 1)
    path = name[len("file:"):] if name.startswith("file:") else name
    return parse_layer(Path(path).read_text(encoding="utf-8"), n)


def _parse_perm(text: str, n: int) -> list[int]:
    size = 1 << n
    if text == "identity":
        return list(range(size))
    kind, _, body = text.partition(":")
    if kind == "swap":
        parts = body.split(",")
        if len(parts) != 2:
            raise ValidationError("swap needs two 1-indexed columns, e.g. swap:5,6")
        a, b = (int(s) - 1 for s in parts)
        if not (0 <= a < size and 0 <= b < size):
            raise ValidationError(f"swap columns must lie in 1..{size}")
        perm = list(range(size))
        perm[a], perm[b] = perm[b], perm[a]
        return perm
    if kind == "list":
        return [int(s) for s in body.split(",")]
    if kind == "layer":
        return [int(v) for v in layer_permutation(_named_layer(body, n), n)]
    raise ValidationError(f"unknown permutation form {text!r}; use identity, swap:a,b, list:... or layer:...")


def cmd_entangle(args, printer: _Output) -> int:
    n = check_int(args.n, "n", minimum=1)
    if args.analysis == "order":
        layer = _named_layer(args.layer, n)
        k = order(layer_to_gf2(layer, n), cap=args.cap)
        gates = [(GateKind.CX, pair, None) for pair in layer]
        dim = 1 << n
        e = run_gates(np.eye(dim, dtype=complex), gates)
        power = np.linalg.matrix_power(e, k)
        verified = bool(np.array_equal(power, np.eye(dim)))
        result = {"layer": [list(p) for p in layer], "order": k, "verified": verified}
        printer.say(f"k={k}")
        printer.say(f"E^k=I: {str(verified).lower()}")
        status = EXIT_OK if verified else EXIT_CHECK
    elif args.analysis == "linearity":
        perm = _parse_perm(args.perm, n)
        verdict = is_linear(perm)
        if isinstance(verdict, NotLinear):
            x, y = verdict.x, verdict.y
            result = {"linear": False, "witness": {"x": x, "y": y, "perm(x^y)": perm[x ^ y],
                                                   "perm(x)^perm(y)": perm[x] ^ perm[y]}}
            printer.say(f"NOT LINEAR, witness: x={x} y={y} perm(x^y)={perm[x ^ y]} "
                        f"perm(x)^perm(y)={perm[x] ^ perm[y]}")
        else:
            result = {"linear": True, "matrix": verdict.tolist()}
            printer.say("LINEAR")
            for row in verdict:
                printer.say("  " + " ".join(str(int(v)) for v in row))
        status = EXIT_OK
    else:
        layer = synthesize_column_move(n, args.source, args.dest)
        # E applied on the right maps column `source` of any unitary to column `dest`
        gates = [(GateKind.CX, pair, None) for pair in layer]
        dim = 1 << n
        e = run_gates(np.eye(dim, dtype=complex), gates)
        verified = bool(e[args.source - 1, args.dest - 1] == 1)
        result = {"cx": [list(p) for p in layer], "verified": verified}
        printer.say("CX " + (format_layer(layer).replace("\n", "; ") if layer else "(none)"))
        printer.say(f"verified: {str(verified).lower()}")
        status = EXIT_OK if verified else EXIT_CHECK
    _emit(_envelope("entangle", args, result), args.output, printer, json_stdout=args.json)
    return status


# -- vqa -------------------------------------------------------------------------

def _load_problem(args):
    if args.problem:
        return args.problem, bundled_problem(args.problem)
    if args.hamiltonian:
        return Path(args.hamiltonian).stem, hamiltonian_problem(load_hamiltonian(args.hamiltonian))
    if args.distances:
        return Path(args.distances).stem, encode_tsp(load_distances(args.distances), args.penalty)
    if args.graph:
        graph = load_graph(args.graph)
        if args.kind == "maxcut":
            return Path(args.graph).stem, encode_maxcut(graph)
        penalty = 2.0 if args.penalty is None else args.penalty
        return Path(args.graph).stem, encode_vertex_cover(graph, penalty)
    raise ValidationError("give one of --problem, --graph, --distances or --hamiltonian")


def cmd_vqa(args, printer: _Output) -> int:
    families = check_families(args.compare or args.family)
    check_int(args.layers, "layers", minimum=0)
    check_int(args.seeds, "seeds", minimum=1)
    if args.target_epsilon is not None:
        check_real(args.target_epsilon, "target-epsilon", low=0.0, low_open=True)
    name, problem = _load_problem(args)
    obs = problem.observable
    exact = exact_minimum(obs)
    rows = []
    for fam in families:
        c = build_ansatz(AnsatzSpec(fam, obs.n, args.layers))
        params, cx, _ = count_resources(c)
        runs = []
        for s in range(args.seeds):
            cfg = OptimizerConfig(restarts=args.restarts, method=args.method, max_evals=args.max_evals,
                                  target_epsilon=args.target_epsilon, seed=args.seed + s,
                                  jobs=args.jobs)
            runs.append(optimize(c, obs, cfg, exact=exact))
        eps = [r.epsilon for r in runs]
        best = min(runs, key=lambda r: r.E_a)
        rows.append({"family": fam.value, "params": params, "cx": cx,
                     "E": exact.energy, "E_a": best.E_a, "epsilon_best": min(eps),
                     "epsilon_median": float(np.median(eps)),
                     "cost": problem.cost(best.E_a), "optimal_cost": problem.cost(exact.energy),
                     "runs": [r.to_dict() for r in runs]})
    result = {"problem": name, "kind": problem.kind, "n_qubits": obs.n, "layers": args.layers,
              "exact_energy": exact.energy, "rows": rows}
    _emit(_envelope("vqa", args, result), args.output, printer, json_stdout=args.json)
    printer.say(f"{name} ({problem.kind}, {obs.n} qubits, {args.layers} layers), "
                f"exact E = {exact.energy:.8f}")
    printer.say(f"{'ansatz':<12} {'params':>6} {'CXs':>5} {'E_a':>14} {'epsilon':>10} {'median eps':>10}")
    for r in rows:
        printer.say(f"{r['family']:<12} {r['params']:>6} {r['cx']:>5} {r['E_a']:>14.8f} "
                    f"{_fmt_eps(r['epsilon_best']):>10} {_fmt_eps(r['epsilon_median']):>10}")
    return EXIT_OK


def _fmt_eps(eps: float) -> str:
    return "< 1e-4" if eps < 1e-4 else f"{eps:.3e}"


# -- repro -----------------------------------------------------------------------

def cmd_repro(args, printer: _Output) -> int:
    from .acceptance import run_all

    only = {int(s) for s in args.only.split(",")} if args.only else None
    results = run_all(only, jobs=args.jobs)
    summary = {"passed": all(r.passed for r in results),
               "criteria": [r.to_dict() for r in results]}
    _emit(_envelope("repro", args, summary), args.output, printer, json_stdout=args.json)
    for r in results:
        budget = "" if r.within_budget else f" (over {r.budget:g}s budget)"
        printer.say(f"[{'PASS' if r.passed else 'FAIL'}] {r.number:>2} {r.title} "
                    f"{r.seconds:.1f}s{budget}")
    return EXIT_OK if summary["passed"] else EXIT_CHECK


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help=f"random seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--quiet", action="store_true", help="suppress human-readable output")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for restarts")
    common.add_argument("-o", "--output", help="write the JSON report (or circuit) here")
    common.add_argument("--json", action="store_true", help="print the JSON report to stdout")

    parser = argparse.ArgumentParser(prog="ansatz-lab", description="Analyse and benchmark "
                                     "hardware-efficient ansatz circuits.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="build an ansatz circuit")
    p.add_argument("--family", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--order", help="CX order for rx-cx-l-mod, comma separated")
    p.set_defaults(handler=cmd_build)

    p = sub.add_parser("reduce", parents=[common], help="count effective parameters")
    p.add_argument("circuit")
    p.add_argument("--check", action="store_true", help="run the shift certificate")
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--no-periodic", action="store_true", help="disable the periodic rule")
    p.set_defaults(handler=cmd_reduce)

    p = sub.add_parser("rank", parents=[common], help="numerical Jacobian rank")
    p.add_argument("circuit")
    p.add_argument("--mode", choices=MODES, default="unitary")
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--rel-tol", type=float, default=DEFAULT_REL_TOL)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--compare", metavar="FILE", help="compare ranks with another circuit")
    group.add_argument("--against-linear", action="store_true",
                       help="compare an alternating RX-CX circuit with its linear form")
    p.set_defaults(handler=cmd_rank)

    p = sub.add_parser("entangle", parents=[common], help="entanglement layer analyses")
    esub = p.add_subparsers(dest="analysis", required=True)
    e = esub.add_parser("order", parents=[common], help="order of a CX layer")
    e.add_argument("--layer", default="linear",
                   help="linear, alternating-even, alternating-odd or a layer file")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--cap", type=int, default=1 << 20)
    e.set_defaults(handler=cmd_entangle)
    e = esub.add_parser("linearity", parents=[common], help="is a basis permutation CX-realizable")
    e.add_argument("--perm", required=True, help="identity, swap:A,B (1-indexed), list:... or layer:...")
    e.add_argument("--n", type=int, required=True)
    e.set_defaults(handler=cmd_entangle)
    e = esub.add_parser("move", parents=[common], help="CX layer moving one column to another")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--from", dest="source", type=int, required=True)
    e.add_argument("--to", dest="dest", type=int, required=True)
    e.set_defaults(handler=cmd_entangle)

    p = sub.add_parser("vqa", parents=[common], help="variational benchmark run")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--problem", help="bundled problem: maxcut_4, vertex_cover_6, tsp_3 or a .pauli name")
    src.add_argument("--graph", help="edge-list file")
    src.add_argument("--distances", help="TSP distance CSV")
    src.add_argument("--hamiltonian", help="Pauli-sum file")
    p.add_argument("--kind", choices=("maxcut", "vertex-cover"), default="maxcut")
    p.add_argument("--penalty", type=float)
    fam = p.add_mutually_exclusive_group()
    fam.add_argument("--family", default="rx-rz-cx-a")
    fam.add_argument("--compare", help="comma-separated families")
    p.add_argument("--layers", type=int, default=4)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--seeds", type=int, default=1, help="independent runs per family")
    p.add_argument("--target-epsilon", type=float)
    p.add_argument("--method", choices=METHODS, default="nelder-mead")
    p.add_argument("--max-evals", type=int)
    p.set_defaults(handler=cmd_vqa)

    p = sub.add_parser("repro", parents=[common], help="run the acceptance checks")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.set_defaults(handler=cmd_repro)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    printer = _Output(args.quiet or args.json)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        check_int(args.jobs, "jobs", minimum=1)
        return args.handler(args, printer)
    except (ParseError, ValidationError, CapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except AnsatzLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

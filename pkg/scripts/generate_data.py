"""Regenerate the bundled benchmark Hamiltonians and their ground-energy headers."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from ansatz_lab.vqa.observable import Observable, PauliString, exact_minimum

DATA = Path(__file__).resolve().parents[1] / "src" / "ansatz_lab" / "data"


def tfim(n: int, j: float = 1.0, h: float = 1.0) -> Observable:
    terms = [(-j, PauliString.from_ops(n, {q: "Z", q + 1: "Z"})) for q in range(n - 1)]
    terms += [(-h, PauliString.from_ops(n, {q: "X"})) for q in range(n)]
    return Observable(terms, 0.0, n)


def heisenberg(n: int, field: float = 0.3) -> Observable:
    terms = []
    for q in range(n - 1):
        for p in "XYZ":
            terms.append((1.0, PauliString.from_ops(n, {q: p, q + 1: p})))
    terms += [(field, PauliString.from_ops(n, {q: "Z"})) for q in range(n)]
    return Observable(terms, 0.0, n)


def random_local(n: int, seed: int, n_terms: int) -> Observable:
    """Random two-local Pauli sum that always contains Y factors."""
    rng = np.random.default_rng(seed)
    terms = []
    while len(terms) < n_terms:
        q = int(rng.integers(0, n - 1))
        a, b = rng.choice(list("XYZ"), size=2)
        if "Y" not in (a, b) and len(terms) % 2 == 0:
            a = "Y"
        terms.append((round(float(rng.normal()), 4), PauliString.from_ops(n, {q: a, q + 1: b})))
    return Observable(terms, 0.0, n)


def write(name: str, obs: Observable, note: str) -> None:
    e = exact_minimum(obs, method="dense").energy
    header = f"# {note}\n# ground_energy: {e:.12f}\n"
    (DATA / f"{name}.pauli").write_text(header + obs.to_text(), encoding="utf-8")
    print(f"{name}: n={obs.n} terms={len(obs)} E0={e:.8f}")


if __name__ == "__main__":
    write("tfim_4", tfim(4), "transverse-field Ising chain, J=1, h=1, open boundary")
    write("heisenberg_4", heisenberg(4), "Heisenberg chain with a uniform 0.3 Z field")
    write("random_4", random_local(4, seed=4, n_terms=10), "random nearest-neighbour two-local terms, seed 4")
    write("tfim_6", tfim(6), "transverse-field Ising chain, J=1, h=1, open boundary")
    write("heisenberg_6", heisenberg(6), "Heisenberg chain with a uniform 0.3 Z field")
    write("random_6", random_local(6, seed=6, n_terms=14), "random nearest-neighbour two-local terms, seed 6")

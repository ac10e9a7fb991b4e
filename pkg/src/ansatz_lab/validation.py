"""Input checks shared by the estimators and the command line."""
from __future__ import annotations

import math
from numbers import Integral, Real
from typing import Sequence

import numpy as np

from .circuit import AnsatzSpec, Circuit, Family, build_ansatz
from .errors import ArityMismatch, ValidationError
from .vqa.observable import Observable


def check_int(value, name: str, *, minimum: int | None = None, maximum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ValidationError(f"{name} must be <= {maximum}, got {value}")
    return value


def check_real(value, name: str, *, low: float | None = None, high: float | None = None,
               low_open: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, Real) or not math.isfinite(float(value)):
        raise ValidationError(f"{name} must be a finite real number, got {value!r}")
    value = float(value)
    if low is not None and (value < low or (low_open and value == low)):
        raise ValidationError(f"{name} must be {'>' if low_open else '>='} {low}, got {value}")
    if high is not None and value > high:
        raise ValidationError(f"{name} must be <= {high}, got {value}")
    return value


def check_circuit(obj, *, name: str = "circuit") -> Circuit:
    """Accept a ``Circuit`` or an ``AnsatzSpec`` (built on the fly)."""
    if isinstance(obj, Circuit):
        return obj
    if isinstance(obj, AnsatzSpec):
        return build_ansatz(obj)
    raise ValidationError(f"{name} must be a Circuit or AnsatzSpec, got {type(obj).__name__}")


def check_theta(theta, n_params: int) -> np.ndarray:
    """One parameter vector, or a 2-D batch with one vector per row."""
    arr = np.asarray(theta, dtype=float)
    if arr.ndim not in (1, 2):
        raise ValidationError(f"theta must be 1-D or 2-D, got shape {arr.shape}")
    if arr.shape[-1] != n_params:
        raise ArityMismatch(f"expected {n_params} parameters, got {arr.shape[-1]}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("theta contains non-finite values")
    return arr


def check_observable(obs, n_qubits: int | None = None) -> Observable:
    if not isinstance(obs, Observable):
        raise ValidationError(f"expected an Observable, got {type(obs).__name__}")
    if n_qubits is not None and obs.n != n_qubits:
        raise ArityMismatch(f"observable acts on {obs.n} qubits, circuit on {n_qubits}")
    return obs


def check_family(name) -> Family:
    return Family.parse(name)


def check_families(names: str | Sequence[str]) -> list[Family]:
    if isinstance(names, str):
        names = [s for s in names.split(",") if s.strip()]
    if not names:
        raise ValidationError("at least one ansatz family is required")
    return [Family.parse(s) for s in names]

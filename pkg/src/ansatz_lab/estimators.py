"""scikit-learn style wrappers around the analysis and optimization entry points.

The inputs are circuits and observables rather than feature matrices, so
these follow the estimator conventions (constructor hyperparameters,
``fit`` returning ``self``, trailing-underscore fitted attributes,
``get_params``/``set_params``) without claiming pipeline compatibility.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .circuit import AnsatzSpec, Circuit
from .rank import DEFAULT_REL_TOL, expressive_rank
from .reduce import combine_parameters, shift_certificate
from .validation import check_circuit, check_int, check_observable, check_real, check_theta
from .vqa.observable import exact_minimum
from .vqa.optimize import OptimizerConfig, energy_function, optimize


class ParameterCombiner(TransformerMixin, BaseEstimator):
    """Find combinable parameters of a circuit; ``transform`` maps raw to effective values.

    Parameters
    ----------
    periodic : bool
        Enable the periodic rule for RX-CX circuits.
    certify : bool
        Run the shift certificate on every class during ``fit``.
    seed : int
        Seed for certificate bindings and Euler-merge checks.
    """

    def __init__(self, periodic: bool = True, certify: bool = False, seed: int = 0):
        self.periodic = periodic
        self.certify = certify
        self.seed = seed

    def fit(self, X, y=None):
        circuit = check_circuit(X)
        self.report_ = combine_parameters(circuit, seed=self.seed, periodic=self.periodic)
        self.effective_count_ = self.report_.effective_count
        self.map_ = self.report_.map
        self.reduced_circuit_ = self.report_.reduced
        self.n_features_in_ = circuit.raw_param_count
        if self.certify:
            rng = np.random.default_rng(self.seed)
            self.certificate_error_ = shift_certificate(circuit, self.map_, rng=rng)
        return self

    def transform(self, X):
        """Signed class sums for one parameter vector or a batch of rows."""
        check_is_fitted(self, "report_")
        theta = check_theta(X, self.n_features_in_)
        if theta.ndim == 1:
            return self.map_.apply(theta)
        return np.vstack([self.map_.apply(row) for row in theta])


class ExpressiveRank(BaseEstimator):
    """Numerical Jacobian rank of a circuit.

    Parameters
    ----------
    mode : {"unitary", "state"}
    seeds : int
        Number of random evaluation points; the maximum rank is kept.
    rel_tol : float
        Singular values below ``rel_tol * sigma_max`` count as zero.
    seed : int
    """

    def __init__(self, mode: str = "unitary", seeds: int = 3, rel_tol: float = DEFAULT_REL_TOL,
                 seed: int = 0):
        self.mode = mode
        self.seeds = seeds
        self.rel_tol = rel_tol
        self.seed = seed

    def fit(self, X, y=None):
        circuit = check_circuit(X)
        check_int(self.seeds, "seeds", minimum=1)
        check_real(self.rel_tol, "rel_tol", low=0.0, high=1e-2, low_open=True)
        self.report_ = expressive_rank(circuit, self.mode, self.seeds, rel_tol=self.rel_tol,
                                       seed=self.seed)
        self.rank_ = self.report_.rank
        self.singular_values_ = np.array(self.report_.singular_values)
        return self


class VariationalSolver(BaseEstimator):
    """Minimize an observable's expectation over the parameters of an ansatz.

    Parameters
    ----------
    ansatz : Circuit or AnsatzSpec
    restarts, method, max_evals, target_epsilon, seed, jobs
        Forwarded to :class:`OptimizerConfig`.
    """

    def __init__(self, ansatz: Circuit | AnsatzSpec | None = None, restarts: int = 20,
                 method: str = "nelder-mead", max_evals: int | None = None,
                 target_epsilon: float | None = None, seed: int = 0, jobs: int = 1):
        self.ansatz = ansatz
        self.restarts = restarts
        self.method = method
        self.max_evals = max_evals
        self.target_epsilon = target_epsilon
        self.seed = seed
        self.jobs = jobs

    def _config(self) -> OptimizerConfig:
        return OptimizerConfig(restarts=self.restarts, method=self.method, max_evals=self.max_evals,
                               target_epsilon=self.target_epsilon, seed=self.seed, jobs=self.jobs)

    def fit(self, X, y=None):
        """``X`` is the observable to minimize."""
        circuit = check_circuit(self.ansatz, name="ansatz")
        obs = check_observable(X, circuit.n_qubits)
        self.circuit_ = circuit
        self.exact_ = exact_minimum(obs)
        self.result_ = optimize(circuit, obs, self._config(), exact=self.exact_)
        self.energy_ = self.result_.E_a
        self.epsilon_ = self.result_.epsilon
        self.theta_ = np.array(self.result_.theta)
        return self

    def energy(self, observable, theta=None):
        """Energy of ``observable`` at the fitted parameters, or at each row of ``theta``."""
        check_is_fitted(self, "result_")
        obs = check_observable(observable, self.circuit_.n_qubits)
        f = energy_function(self.circuit_, obs)
        theta = self.theta_ if theta is None else check_theta(theta, self.circuit_.raw_param_count)
        if theta.ndim == 1:
            return f(theta)
        return np.array([f(row) for row in theta])

    def score(self, X, y=None):
        """Negative approximation error on observable ``X`` (higher is better)."""
        check_is_fitted(self, "result_")
        obs = check_observable(X, self.circuit_.n_qubits)
        return -abs(self.energy(obs) - exact_minimum(obs).energy)

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from ansatz_lab.circuit import AnsatzSpec, build_ansatz
from ansatz_lab.errors import ArityMismatch, ValidationError
from ansatz_lab.estimators import ExpressiveRank, ParameterCombiner, VariationalSolver
from ansatz_lab.qsim import circuit_state
from ansatz_lab.vqa.observable import Observable
from ansatz_lab.vqa.problems import bundled_problem


class TestParameterCombiner:
    def test_fit_exposes_counts(self):
        est = ParameterCombiner().fit(AnsatzSpec("rx-cx-l", 4, 8))
        assert est.effective_count_ == 11
        assert est.n_features_in_ == build_ansatz(AnsatzSpec("rx-cx-l", 4, 8)).raw_param_count

    def test_transform_preserves_the_state(self):
        c = build_ansatz(AnsatzSpec("rx-cx-l", 3, 4))
        est = ParameterCombiner(certify=True).fit(c)
        assert est.certificate_error_ < 1e-9
        theta = np.random.default_rng(0).uniform(0, 6, c.raw_param_count)
        phi = est.transform(theta)
        assert phi.shape == (est.effective_count_,)
        # Move each class sum onto its first member; the state depends only on the sums.
        moved = np.zeros_like(theta)
        for cls, value in zip(est.map_.classes, phi):
            pid, sign = cls.members[0]
            moved[pid] = sign * value
        np.testing.assert_allclose(est.transform(moved), phi, atol=1e-12)
        np.testing.assert_allclose(circuit_state(c, moved), circuit_state(c, theta), atol=1e-10)

    def test_batch_transform(self):
        c = build_ansatz(AnsatzSpec("rx-cx-l", 3, 2))
        est = ParameterCombiner().fit(c)
        rows = np.random.default_rng(1).uniform(0, 6, (4, c.raw_param_count))
        out = est.transform(rows)
        assert out.shape == (4, est.effective_count_)
        np.testing.assert_allclose(out[2], est.transform(rows[2]))

    def test_params_and_clone(self):
        est = ParameterCombiner(periodic=False, seed=4)
        assert est.get_params() == {"periodic": False, "certify": False, "seed": 4}
        copy = clone(est.set_params(seed=5))
        assert copy.seed == 5 and not hasattr(copy, "report_")

    def test_periodic_rule_toggle(self):
        spec = AnsatzSpec("rx-cx-l", 4, 8)
        assert ParameterCombiner(periodic=False).fit(spec).effective_count_ > 11

    def test_errors(self):
        with pytest.raises(NotFittedError):
            ParameterCombiner().transform([0.0])
        est = ParameterCombiner().fit(AnsatzSpec("rx-cx-l", 2, 1))
        with pytest.raises(ArityMismatch):
            est.transform([0.0])
        with pytest.raises(ValidationError):
            ParameterCombiner().fit("not a circuit")


class TestExpressiveRank:
    def test_rank(self):
        est = ExpressiveRank().fit(AnsatzSpec("rx-cx-l", 4, 8))
        assert est.rank_ == 11
        assert est.singular_values_[0] >= est.singular_values_[-1]

    def test_state_mode(self):
        assert ExpressiveRank(mode="state").fit(AnsatzSpec("ry-cx-a", 2, 2)).rank_ <= 3

    @pytest.mark.parametrize("kwargs", [dict(seeds=0), dict(rel_tol=0.0), dict(rel_tol=0.5)])
    def test_validation(self, kwargs):
        with pytest.raises(ValidationError):
            ExpressiveRank(**kwargs).fit(AnsatzSpec("rx-cx-l", 2, 1))


class TestVariationalSolver:
    def test_fit_maxcut(self):
        problem = bundled_problem("maxcut_4")
        est = VariationalSolver(AnsatzSpec("rx-rz-cx-a", 4, 4), target_epsilon=1e-4)
        est.fit(problem.observable)
        assert est.epsilon_ < 1e-4
        assert est.energy(problem.observable) == pytest.approx(est.energy_, abs=1e-12)
        assert est.score(problem.observable) == pytest.approx(-est.epsilon_, abs=1e-12)

    def test_energy_batch(self):
        obs = Observable([(1.0, "Z")])
        from ansatz_lab.circuit import Circuit, Gate, ParamExpr
        from ansatz_lab.qsim import GateKind

        circuit = Circuit(1, (Gate(GateKind.RX, (0,), ParamExpr.param(0)),), 1)
        est = VariationalSolver(circuit, restarts=2).fit(obs)
        np.testing.assert_allclose(est.energy(obs, [[0.0], [np.pi / 2], [np.pi]]), [1, 0, -1], atol=1e-12)

    def test_clone_keeps_hyperparameters(self):
        est = VariationalSolver(AnsatzSpec("rx-cx-l", 2, 1), restarts=3, seed=7)
        copy = clone(est)
        assert copy.get_params()["restarts"] == 3 and copy.seed == 7

    def test_errors(self):
        with pytest.raises(ValidationError):
            VariationalSolver().fit(Observable([(1.0, "Z")]))
        with pytest.raises(ValidationError):
            VariationalSolver(AnsatzSpec("rx-cx-l", 2, 1), restarts=0).fit(Observable([(1.0, "ZZ")]))
        with pytest.raises(ArityMismatch):
            VariationalSolver(AnsatzSpec("rx-cx-l", 2, 1)).fit(Observable([(1.0, "ZZZ")]))
        with pytest.raises(NotFittedError):
            VariationalSolver().energy(Observable([(1.0, "Z")]))

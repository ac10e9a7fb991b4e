import math

import numpy as np
import pytest

from ansatz_lab.circuit import AnsatzSpec, Circuit, Family, Gate, ParamExpr, build_ansatz
from ansatz_lab.errors import EmptyMatrix, ValidationError
from ansatz_lab.qsim import GateKind
from ansatz_lab.rank import (
    expressive_rank,
    finite_difference_jacobian,
    jacobian,
    numerical_rank,
    state_jacobian,
    unitary_jacobian,
)
from ansatz_lab.reduce import combine_parameters

FAMILIES = [f.value for f in Family if f is not Family.RX_CX_L_MOD]


class TestJacobian:
    @pytest.mark.parametrize("family", FAMILIES)
    @pytest.mark.parametrize("mode", ["unitary", "state"])
    def test_matches_central_differences(self, family, mode):
        c = build_ansatz(AnsatzSpec(family, 3, 2))
        theta = np.random.default_rng(0).uniform(0, 2 * math.pi, c.raw_param_count)
        a = unitary_jacobian(c, theta) if mode == "unitary" else state_jacobian(c, theta, project_phase=False)
        f = finite_difference_jacobian(c, theta, mode)
        assert np.max(np.abs(a - f) / (1 + np.abs(a))) < 1e-7

    def test_shared_parameters_accumulate(self):
        gates = (Gate(GateKind.RX, (0,), ParamExpr(((0, 2),))),
                 Gate(GateKind.RZ, (0,), ParamExpr(((0, -1), (1, 1)), 1)))
        c = Circuit(1, gates, 2)
        theta = [0.4, 1.3]
        np.testing.assert_allclose(unitary_jacobian(c, theta), finite_difference_jacobian(c, theta),
                                   atol=1e-8)

    def test_phase_projection_removes_global_phase_direction(self):
        # RZ on |0> only changes the global phase
        c = Circuit(1, (Gate(GateKind.RZ, (0,), ParamExpr.param(0)),), 1)
        assert numerical_rank(state_jacobian(c, [0.3])) == 0
        assert numerical_rank(state_jacobian(c, [0.3], project_phase=False)) == 1

    def test_shapes(self):
        c = build_ansatz(AnsatzSpec("rx-cx-l", 2, 1))
        assert jacobian(c, np.zeros(4)).shape == (2 * 16, 4)
        assert jacobian(c, np.zeros(4), "state").shape == (2 * 4, 4)

    def test_bad_mode(self):
        with pytest.raises(ValidationError):
            jacobian(build_ansatz(AnsatzSpec("rx-cx-l", 2, 1)), np.zeros(4), "density")


class TestNumericalRank:
    def test_known_rank(self):
        rng = np.random.default_rng(0)
        m = rng.normal(size=(20, 3)) @ rng.normal(size=(3, 7))
        assert numerical_rank(m) == 3

    def test_zero_matrix(self):
        assert numerical_rank(np.zeros((4, 3))) == 0

    def test_tolerance_window(self):
        m = np.diag([1.0, 1e-6])
        assert numerical_rank(m, 1e-8) == 2
        assert numerical_rank(m, 1e-4) == 1
        for bad in (0.0, -1e-9, 0.5):
            with pytest.raises(ValidationError):
                numerical_rank(m, bad)

    def test_empty(self):
        with pytest.raises(EmptyMatrix):
            numerical_rank(np.zeros((0, 3)))


class TestExpressiveRank:
    def test_two_qubit_deep_linear_capped(self):
        c = build_ansatz(AnsatzSpec("rx-cx-l", 2, 10))
        assert expressive_rank(c).rank <= 3

    def test_no_parameters(self):
        report = expressive_rank(Circuit(2, (Gate(GateKind.CX, (0, 1)),), 0))
        assert report.rank == 0

    def test_single_rotation(self):
        c = Circuit(1, (Gate(GateKind.RX, (0,), ParamExpr.param(0)),), 1)
        assert expressive_rank(c).rank == 1

    def test_bounded_by_dimension_of_su(self):
        c = build_ansatz(AnsatzSpec("rx-rz-cx-a", 2, 8))
        assert expressive_rank(c).rank == 15

    def test_deterministic_given_seed(self):
        c = build_ansatz(AnsatzSpec("rx-rz-cx-a", 3, 2))
        a = expressive_rank(c, seeds=2, seed=5)
        b = expressive_rank(c, seeds=2, seed=5)
        assert a == b

    @pytest.mark.parametrize("family", FAMILIES)
    def test_rank_never_exceeds_rule_count(self, family):
        c = build_ansatz(AnsatzSpec(family, 4, 3))
        assert expressive_rank(c).rank <= combine_parameters(c).effective_count

    def test_state_rank_not_above_unitary_rank(self):
        c = build_ansatz(AnsatzSpec("rx-rz-cx-a", 4, 2))
        assert expressive_rank(c, "state").rank <= expressive_rank(c).rank

    def test_subsampling_keeps_rank(self):
        c = build_ansatz(AnsatzSpec("rx-cx-a", 4, 4))
        full = expressive_rank(c, subsample=False).rank
        assert expressive_rank(c, subsample=True).rank == full

    def test_report_json(self):
        import json

        report = expressive_rank(build_ansatz(AnsatzSpec("rx-cx-l", 3, 1)))
        data = json.loads(report.to_json())
        assert data["rank"] == report.rank and data["n_params"] == 6

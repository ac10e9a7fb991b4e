"""One test per acceptance criterion; each asserts the outcome and the runtime budget."""
import pytest

from ansatz_lab import acceptance as acc


def assert_passed(result):
    assert result.passed, result.details
    assert result.within_budget, f"{result.seconds:.1f}s exceeds the {result.budget:g}s budget"


def test_01_resource_counts():
    assert_passed(acc.check_resource_counts())


def test_02_x_rule_identities():
    assert_passed(acc.check_x_rule())


def test_03_linear_bound_and_periods():
    assert_passed(acc.check_linear_bound())


def test_04_order_invariance():
    assert_passed(acc.check_order_invariance())


def test_05_alternating_reduction():
    assert_passed(acc.check_alternating_reduction())


def test_06_closed_form_counts():
    assert_passed(acc.check_formula_counts())


def test_07_layer_order():
    assert_passed(acc.check_layer_order())


def test_08_column_moves_and_linearity():
    assert_passed(acc.check_column_moves())


@pytest.mark.slow
def test_09_qaoa_tolerance():
    assert_passed(acc.check_qaoa())


@pytest.mark.slow
def test_10_vqe_ordering():
    assert_passed(acc.check_vqe_ordering())


def test_11_numerics():
    assert_passed(acc.check_numerics())

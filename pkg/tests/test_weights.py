"""Weight families against independently derived reference values.

The reference constants below were computed from closed forms before the
implementation existed and are frozen here on purpose; a change that
moves them is a bug, not a calibration drift.
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from errwlab.errors import SummabilityError, TailTruncationError
from errwlab.weights import (
    FAILS,
    HOLDS,
    UNKNOWN,
    ExponentialWeight,
    PowerWeight,
    TableWeight,
    weight_from_config,
)

# zeta(4) = pi^4 / 90; the tail from index 1 drops the leading 1.
ZETA4 = 1.0823232337111382
ZETA4_MINUS_1 = 0.08232323371113819
# sum_{k>=0} 4^{-k}, geometric closed form.
GEOMETRIC_SQ_TOTAL = 4.0 / 3.0


def test_power_rejects_bad_exponent():
    with pytest.raises(ValueError):
        PowerWeight(0.0)
    with pytest.raises(ValueError):
        PowerWeight(-2.0)


def test_exponential_rejects_base_at_most_one():
    with pytest.raises(ValueError):
        ExponentialWeight(1.0)
    with pytest.raises(ValueError):
        ExponentialWeight(0.5)


def test_pointwise_values():
    p = PowerWeight(2.0)
    assert [p.eval(k) for k in range(4)] == [1.0, 4.0, 9.0, 16.0]
    e = ExponentialWeight(2.0)
    assert [e.eval(k) for k in range(4)] == [1.0, 2.0, 4.0, 8.0]


def test_exact_rational_values_where_defined():
    assert PowerWeight(2.0).eval_fraction(3) == Fraction(16)
    assert ExponentialWeight(2.0).eval_fraction(5) == Fraction(32)
    assert PowerWeight(2.5).eval_fraction(3) is None


def test_prefix_sum_closed_forms():
    # 1 + 1/2 + 1/4 for doubling weights.
    assert ExponentialWeight(2.0).reciprocal_sum(3) == 1.75
    # 1 + 1/4 + 1/9 for quadratic weights.
    assert math.isclose(
        PowerWeight(2.0).reciprocal_sum(3), 49.0 / 36.0, rel_tol=1e-15
    )
    assert ExponentialWeight(2.0).reciprocal_sum(0) == 0.0


def test_prefix_sum_array_matches_scalar():
    w = PowerWeight(2.0)
    arr = w.reciprocal_sum_array(50)
    assert len(arr) == 51
    for n in (0, 1, 7, 50):
        assert arr[n] == w.reciprocal_sum(n)
    assert np.all(np.diff(arr) > 0)


def test_classification_table():
    assert PowerWeight(2.0).classify().verdict == HOLDS
    assert PowerWeight(1.01).classify().verdict == HOLDS
    assert PowerWeight(1.0).classify().verdict == FAILS
    assert PowerWeight(0.5).classify().verdict == FAILS
    assert ExponentialWeight(1.5).classify().verdict == HOLDS
    assert TableWeight([2.0, 5.0]).classify().verdict == UNKNOWN
    assert (
        TableWeight([2.0, 5.0], tail=PowerWeight(3.0)).classify().verdict
        == HOLDS
    )
    assert (
        TableWeight([2.0], tail=PowerWeight(1.0)).classify().verdict == FAILS
    )


def test_strongly_reinforcing_property():
    assert PowerWeight(2.0).classify().strongly_reinforcing is True
    assert PowerWeight(1.0).classify().strongly_reinforcing is False


def test_transition_probability_exact_cases():
    e = ExponentialWeight(2.0)
    # Left count 0 (weight 1), right count 1 (weight 2).
    assert math.isclose(e.right_step_probability(0, 1), 2.0 / 3.0, rel_tol=1e-15)
    p = PowerWeight(2.0)
    # Left count 1 (weight 4), right count 0 (weight 1).
    assert math.isclose(p.right_step_probability(1, 0), 0.2, rel_tol=1e-15)
    assert p.right_step_probability(3, 3) == 0.5


def test_scalar_probability_equals_array_entry():
    # The scalar walk and the lockstep batch walk must see bit-identical
    # probabilities; the scalar path is defined as the 1-element array.
    for w in (PowerWeight(2.0), PowerWeight(60.0), ExponentialWeight(3.0)):
        for cl, cr in ((0, 0), (5, 2), (40, 41), (123, 7)):
            batch = w.right_step_probability_array(
                np.array([cl]), np.array([cr])
            )[0]
            assert w.right_step_probability(cl, cr) == batch


def test_log_space_route_matches_exact_rationals():
    w = PowerWeight(60.0)
    exact = Fraction(2**60, 2**60 + 3**60)
    assert math.isclose(
        w.right_step_probability(2, 1), float(exact), rel_tol=1e-12
    )
    # Far in the tails the direct quotient would overflow; the log route
    # must still give a tiny but nonzero probability (5001/3)^-60.
    p = w.right_step_probability(5000, 2)
    assert 0.0 < p < 1e-190


@given(
    st.sampled_from([1.5, 2.0, 60.0]),
    st.integers(0, 500),
    st.integers(0, 500),
)
def test_probability_complement_symmetry(exponent, cl, cr):
    # With lopsided counts at exponent 60 the smaller side is below one
    # ulp of 1.0, so the closed interval is the honest float claim.
    w = PowerWeight(exponent)
    p = w.right_step_probability(cl, cr)
    q = w.right_step_probability(cr, cl)
    assert 0.0 <= p <= 1.0
    assert math.isclose(p + q, 1.0, rel_tol=1e-12)


def test_certified_tail_bounds_dominate_true_tails():
    e = ExponentialWeight(2.0)
    # Geometric tails are exact: bound equals the true remainder.
    assert math.isclose(e.reciprocal_tail_bound(5), 2.0 ** (-4), rel_tol=1e-15)
    p = PowerWeight(2.0)
    true_tail = sum((k + 1.0) ** -2 for k in range(10, 100_000))
    assert p.reciprocal_tail_bound(10) >= true_tail


def test_cutoffs_are_minimal_certified_indices():
    e = ExponentialWeight(2.0)
    c = e.reciprocal_tail_cutoff(1e-9)
    assert c == 31
    assert e.reciprocal_tail_bound(c) < 1e-9 <= e.reciprocal_tail_bound(c - 1)
    p = PowerWeight(2.0)
    c = p.reciprocal_tail_cutoff(0.01)
    assert c == 101
    assert p.reciprocal_tail_bound(c) < 0.01 <= p.reciprocal_tail_bound(c - 1)


def test_total_reciprocal_sum_geometric():
    total = ExponentialWeight(2.0).reciprocal_sum_total(1e-12)
    assert 0.0 < 2.0 - total < 1.1e-12


def test_total_reciprocal_sum_divergent_raises():
    with pytest.raises(SummabilityError):
        PowerWeight(1.0).reciprocal_sum_total(1e-6)
    with pytest.raises(SummabilityError):
        TableWeight([3.0, 4.0]).reciprocal_sum_total(1e-6)


def test_total_reciprocal_sum_budget_guard():
    # Quadratic reciprocals need about 1e9 terms at 1e-9; the term budget
    # refuses long before that.
    with pytest.raises(TailTruncationError) as exc:
        PowerWeight(2.0).reciprocal_sum_total(1e-9)
    assert exc.value.required_terms >= 10**9


def test_tail_variance_frozen_references():
    w = PowerWeight(2.0)
    assert math.isclose(w.tail_variance(0), ZETA4, abs_tol=2e-12)
    assert math.isclose(w.tail_variance(1), ZETA4_MINUS_1, abs_tol=2e-12)
    e = ExponentialWeight(2.0)
    assert math.isclose(e.tail_variance(0), GEOMETRIC_SQ_TOTAL, abs_tol=2e-12)


def test_tail_variance_array_matches_scalar_and_is_monotone():
    w = PowerWeight(2.0)
    arr = w.tail_variance_array(20)
    assert len(arr) == 21
    for m in (0, 3, 20):
        assert arr[m] == w.tail_variance(m)
    assert np.all(np.diff(arr) < 0)


def test_tail_variance_budget_guard():
    # Near-critical exponents push the certified squared cutoff into the
    # billions; this must refuse, not allocate.
    with pytest.raises(TailTruncationError):
        PowerWeight(1.15).tail_variance(0)


def test_table_weight_piecewise_lookup():
    t = TableWeight([5.0, 0.5], tail=ExponentialWeight(2.0))
    assert [t.eval(k) for k in range(5)] == [5.0, 0.5, 4.0, 8.0, 16.0]
    assert t.eval_fraction(1) == Fraction(1, 2)
    assert t.eval_fraction(3) == Fraction(8)
    arr = t.eval_array(np.arange(5))
    assert arr.tolist() == [5.0, 0.5, 4.0, 8.0, 16.0]


def test_table_weight_without_tail_rejects_tail_queries():
    t = TableWeight([1.0, 2.0, 3.0])
    assert t.eval(2) == 3.0
    with pytest.raises(SummabilityError):
        t.eval(3)
    with pytest.raises(SummabilityError):
        t.reciprocal_tail_cutoff(1e-6)


def test_table_weight_rejects_bad_values():
    with pytest.raises(ValueError):
        TableWeight([])
    with pytest.raises(ValueError):
        TableWeight([1.0, 0.0])
    with pytest.raises(ValueError):
        TableWeight([1.0, -3.0])


def test_factory_round_trips_describe():
    for w in (
        PowerWeight(2.5),
        ExponentialWeight(1.5),
        TableWeight([2.0, 7.0], tail=PowerWeight(3.0)),
    ):
        clone = weight_from_config(w.describe())
        assert clone.describe() == w.describe()


def test_factory_rejects_malformed_configs():
    for bad in (
        {},
        {"family": "nope"},
        {"family": "power"},
        {"family": "power", "exponent": 2.0, "extra": 1},
        {"family": "power", "exponent": "2"},
        {"family": "power", "exponent": True},
        {"family": "exponential", "base": 1.0},
        {"family": "table", "values": []},
        {"family": "table", "values": [1.0], "tail": {"family": "nope"}},
    ):
        with pytest.raises((ValueError, SummabilityError)):
            weight_from_config(bad)


def test_prefix_cache_is_consistent_under_interleaved_queries():
    # Hitting the cache out of order must agree with a fresh instance
    # queried in order.
    w = PowerWeight(2.0)
    out_of_order = [w.reciprocal_sum(n) for n in (17, 3, 90, 45, 3)]
    fresh = PowerWeight(2.0)
    in_order = [fresh.reciprocal_sum(n) for n in (3, 3, 17, 45, 90)]
    assert out_of_order[1] == in_order[0]
    assert out_of_order[0] == in_order[2]
    assert out_of_order[2] == in_order[4]

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddkit.theory import (
    DECAY,
    GROWTH_FACTOR,
    bound_check,
    expected_gain,
    next_prob,
    next_prob_from_size,
    optimal_int_size,
    prob_at_round,
    schedule,
    size_from_prob,
    size_recursion,
)

# reference values computed with mpmath at 40 digits


def test_constants():
    assert GROWTH_FACTOR == pytest.approx(1.5819767068693264243850020, rel=1e-15)
    assert DECAY == pytest.approx(0.63212055882855767840447622, rel=1e-15)


@pytest.mark.parametrize(
    "fn, args, expected",
    [
        (size_from_prob, (0.25,), 3.4760594967822069104),
        (next_prob, (0.1,), 0.15819767068693264244),
        (next_prob, (0.25,), 0.39549417671733160610),
        (prob_at_round, (3, 0.1), 0.39591344817435085993),
        (size_recursion, (2,), 1.0266129025127444728),
        (size_recursion, (10,), 6.1289419986952843809),
    ],
)
def test_reference_values(fn, args, expected):
    assert fn(*args) == pytest.approx(expected, rel=1e-13)


@given(st.floats(1e-6, 0.632))
def test_next_prob_matches_optimal_size_update(p):
    assert next_prob_from_size(p, size_from_prob(p)) == pytest.approx(next_prob(p), rel=1e-9)


@given(st.floats(1e-6, 0.999))
def test_size_from_prob_maximizes_real_gain(p):
    s = size_from_prob(p)
    g = expected_gain(s, p)
    assert g >= expected_gain(s * 1.01, p) and g >= expected_gain(s * 0.99, p)


@pytest.mark.parametrize("p, size", [(0.25, 4), (0.3, 3), (0.1, 10), (0.5, 1), (0.9, 1), (0.01, 100)])
def test_optimal_int_size_examples(p, size):
    assert optimal_int_size(p) == size


def test_bound_examples():
    b = bound_check(2)
    assert b.lower == pytest.approx(0.26424111765711536, rel=1e-14)
    assert b.upper == pytest.approx(1.2642411176571154, rel=1e-14)
    assert b.holds


def test_bounds_on_grid():
    s = np.geomspace(2, 1e9, 2000)
    assert all(bound_check(v).holds for v in s)


def test_recursion_and_next_prob_agree():
    # one round of the size recursion is size_from_prob(next_prob(p))
    for p in [0.001, 0.02, 0.2, 0.5]:
        assert size_recursion(size_from_prob(p)) == pytest.approx(
            size_from_prob(next_prob(p)), rel=1e-12
        )


def test_schedule_for_quarter():
    rows = schedule(0.25)
    assert [(r.round, r.size) for r in rows] == [(0, 4), (1, 2), (2, 1)]
    assert rows[0].prob == 0.25
    assert rows[1].prob == pytest.approx(0.39549417671733160610, rel=1e-13)
    assert all(r.holds is not False for r in rows)


@pytest.mark.parametrize("bad", [0.0, 1.0, -1.0, math.nan])
def test_prob_domain(bad):
    with pytest.raises(ValueError):
        size_from_prob(bad)


def test_next_prob_domain():
    with pytest.raises(ValueError):
        next_prob(0.7)


def test_size_recursion_domain():
    with pytest.raises(ValueError):
        size_recursion(1.0)

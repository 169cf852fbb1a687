"""
Tests for eventual structure detection and the linear size law.
"""

from dataclasses import replace
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sumsets.errors import PreconditionViolation, StabilizationNotFound, StructureInvariantError
from sumsets.intset import from_elements, growth_profile, hfold, interval, normalize, reflect
from sumsets.structure import (
    decompose,
    eventual_structure,
    predicted_set,
    predicted_size,
    verify_structure,
)

normalized_sets = st.lists(st.integers(1, 12), min_size=1, max_size=6).map(
    lambda xs: normalize(from_elements([0] + xs))[0]
)


def test_structure_of_0_1_3():
    es = eventual_structure(from_elements([0, 1, 3]))
    assert (es.N, es.h0, es.b, es.c) == (3, 2, 0, 2)
    assert es.A1 == () and es.A2 == (0,)
    assert (es.delta, es.gamma) == (1, 2)
    assert es.deficit_constant == 0


def test_structure_of_reflected_set_swaps_fringes():
    A = from_elements([0, 1, 3])
    es = eventual_structure(reflect(A))
    assert (es.h0, es.b, es.c, es.A1, es.A2, es.delta) == (2, 2, 0, (0,), (), 1)
    assert es == eventual_structure(A).swapped()


def test_structure_of_interval():
    es = eventual_structure(interval(0, 1))
    assert (es.h0, es.b, es.c, es.A1, es.A2, es.delta, es.gamma) == (1, 0, 0, (), (), 0, 0)
    assert es.deficit_constant == -1


def test_structure_of_equal_diameter_base_pair():
    a = eventual_structure(from_elements([0, 1, 3, 4]))
    b = eventual_structure(from_elements([0, 1, 2, 4]))
    assert (a.h0, a.delta) == (2, 0)
    assert (b.h0, b.delta, b.c, b.A2) == (2, 1, 2, (0,))


def test_predicted_size_and_set():
    es = eventual_structure(from_elements([0, 1, 3]))
    assert [predicted_size(es, h) for h in range(2, 6)] == [6, 9, 12, 15]
    assert predicted_set(es, 4).tolist() == list(range(0, 11)) + [12]
    with pytest.raises(PreconditionViolation):
        predicted_size(es, 1)


def test_decompose_splits_around_the_longest_run():
    d = decompose(hfold(from_elements([0, 1, 3]), 3), 3, 3)
    assert (d.b, d.c, d.low, d.high, d.middle_length) == (0, 2, (), (0,), 8)
    with pytest.raises(PreconditionViolation):
        decompose(from_elements([1, 2]), 1, 2)


def test_perturbed_deficit_is_caught():
    A = from_elements([0, 1, 3])
    es = eventual_structure(A)
    bad = replace(es, delta=es.delta + 1)
    with pytest.raises(StructureInvariantError):
        bad.validate()
    assert not verify_structure(A, bad, es.h0 + 1)


def test_stabilization_not_found_carries_profile():
    with pytest.raises(StabilizationNotFound) as info:
        eventual_structure(from_elements([0, 1, 3]), cap=1)
    assert info.value.profile == [3, 6]


def test_structure_needs_a_normalized_set():
    with pytest.raises(PreconditionViolation):
        eventual_structure(from_elements([0, 2, 4]))
    with pytest.raises(PreconditionViolation):
        eventual_structure(from_elements([0]))


@settings(max_examples=200, deadline=None)
@given(normalized_sets)
def test_sizes_grow_by_N_from_the_onset(A):
    es = eventual_structure(A)
    differences = growth_profile(A, es.h0 + 6).first_differences()
    assert all(d == es.N for d in differences[es.h0 - 1:])


@settings(max_examples=200, deadline=None)
@given(normalized_sets)
def test_reflection_keeps_the_deficit(A):
    assert eventual_structure(reflect(A)).delta == eventual_structure(A).delta


@settings(max_examples=200, deadline=None)
@given(normalized_sets)
def test_detection_persists_past_the_onset(A):
    es = eventual_structure(A)
    assert verify_structure(A, es, es.h0)
    assert verify_structure(A, es, es.h0 + 1)
    assert verify_structure(A, es, es.h0 + 2)


@pytest.mark.slow
@pytest.mark.parametrize("N", range(1, 13))
def test_exhaustive_corpus(N):
    """Every normalized A with 0, N in A: the decomposition holds on [h0, h0 + 10]."""
    for k in range(0, N):
        for interior in combinations(range(1, N), k):
            A = from_elements((0,) + interior + (N,))
            if A.gcd != 1:
                continue
            es = eventual_structure(A)
            assert 0 <= es.delta <= N + 1
            for h in range(es.h0, es.h0 + 11):
                assert len(hfold(A, h)) == predicted_size(es, h)
                assert verify_structure(A, es, h), (A, h)

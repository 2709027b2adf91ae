import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fixscope.info import (
    EmptySampleError,
    JointCounts,
    JointPmf,
    conditional_entropy,
    entropy,
    entropy_from_counts,
    estimate_pmf,
    joint_from_pairs,
    joint_stats_from_table,
    mutual_information,
)

CORRELATED = JointPmf.from_dict({(0, 0): 0.4, (0, 1): 0.1, (1, 0): 0.1, (1, 1): 0.4})
# Oracle values computed by direct summation over the 4-cell table:
# H(X,Z) = -(2*0.4*log2 0.4 + 2*0.1*log2 0.1), H(Z) = 1.
H_X_GIVEN_Z = 0.7219280948873621
MI = 0.2780719051126379


@pytest.mark.parametrize("symbols, expected", [
    ([0, 0, 0, 0], {0: 1.0}),
    ([0, 1, 0, 1], {0: 0.5, 1: 0.5}),
    ([0, 0, 0, 1], {0: 0.75, 1: 0.25}),
])
def test_estimate_pmf(symbols, expected):
    assert estimate_pmf(symbols).as_dict() == expected


def test_estimate_pmf_empty():
    with pytest.raises(EmptySampleError):
        estimate_pmf([])
    with pytest.raises(EmptySampleError):
        joint_from_pairs([])


def test_entropy_values():
    assert entropy(estimate_pmf([0, 0, 0, 0])) == 0.0
    assert entropy(estimate_pmf([0, 1])) == pytest.approx(1.0, abs=1e-12)
    assert entropy(estimate_pmf([0, 0, 0, 1])) == pytest.approx(0.8112781, abs=1e-6)


def test_conditional_entropy_values():
    assert conditional_entropy(joint_from_pairs([(0, 0), (1, 1)])) == 0.0
    indep = joint_from_pairs([(0, 0), (0, 1), (1, 0), (1, 1)])
    assert conditional_entropy(indep) == pytest.approx(1.0, abs=1e-12)
    assert conditional_entropy(CORRELATED) == pytest.approx(H_X_GIVEN_Z, abs=1e-12)


def test_mutual_information_values():
    indep = joint_from_pairs([(0, 0), (0, 1), (1, 0), (1, 1)])
    assert mutual_information(indep) == pytest.approx(0.0, abs=1e-12)
    assert mutual_information(joint_from_pairs([(0, 0), (1, 1)])) == pytest.approx(1.0, abs=1e-12)
    assert mutual_information(CORRELATED) == pytest.approx(MI, abs=1e-12)


@pytest.mark.parametrize("pairs, expected", [
    ([(0, 0), (0, 0)], {(0, 0): 1.0}),
    ([(0, 1), (1, 0)], {(0, 1): 0.5, (1, 0): 0.5}),
    ([(0, 0), (0, 1), (1, 1), (1, 1)], {(0, 0): 0.25, (0, 1): 0.25, (1, 1): 0.5}),
])
def test_joint_from_pairs(pairs, expected):
    assert joint_from_pairs(pairs).as_dict() == expected


def test_pmf_validation():
    with pytest.raises(ValueError):
        JointPmf.from_dict({(0, 0): 0.5, (1, 1): 0.4})


symbol = st.integers(0, 7)
pair_lists = st.lists(st.tuples(symbol, symbol), min_size=1, max_size=300)


@given(pair_lists)
def test_marginals_match_estimate(pairs):
    j = joint_from_pairs(pairs)
    xs = estimate_pmf([a for a, _ in pairs])
    np.testing.assert_array_equal(j.marginal_x().support, xs.support)
    np.testing.assert_allclose(j.marginal_x().probs, xs.probs, atol=1e-12)


@given(pair_lists)
def test_identities(pairs):
    j = joint_from_pairs(pairs)
    hx, hy = entropy(j.marginal_x()), entropy(j.marginal_y())
    hxz, mi = conditional_entropy(j), mutual_information(j)
    assert -1e-9 <= hxz <= hx + 1e-9
    assert abs(hx - mi - hxz) < 1e-9
    assert mi >= -1e-12
    assert mi <= min(hx, hy) + 1e-9
    assert mutual_information(j.swapped()) == mi


@given(pair_lists, st.permutations(range(8)), st.integers(1, 50), st.integers(-100, 100))
def test_relabeling_invariance(pairs, perm, scale, shift):
    j = joint_from_pairs(pairs)
    relabeled = joint_from_pairs([(perm[a], b * scale + shift) for a, b in pairs])
    assert entropy(relabeled.marginal_x()) == pytest.approx(entropy(j.marginal_x()), abs=1e-12)
    assert conditional_entropy(relabeled) == pytest.approx(conditional_entropy(j), abs=1e-12)
    assert mutual_information(relabeled) == pytest.approx(mutual_information(j), abs=1e-12)


def naive_histogram(pairs):
    table = {}
    for a, b in pairs:
        found = False
        for key in table:
            if key == (a, b):
                table[key] += 1
                found = True
        if not found:
            table[(a, b)] = 1
    return table


@given(st.lists(st.tuples(symbol, symbol), min_size=1, max_size=1000))
def test_counts_match_naive_histogram(pairs):
    assert dict(JointCounts.from_pairs(pairs).counts) == naive_histogram(pairs)
    xs = np.array([a for a, _ in pairs])
    ys = np.array([b for _, b in pairs])
    assert dict(JointCounts.from_arrays(xs, ys).counts) == naive_histogram(pairs)


@given(pair_lists, pair_lists, pair_lists)
def test_merge_associative_commutative(a, b, c):
    A, B, C = (JointCounts.from_pairs(p) for p in (a, b, c))
    assert A.merge(B).merge(C).counts == A.merge(B.merge(C)).counts
    assert A.merge(B).counts == B.merge(A).counts
    assert A.merge(B).counts == Counter(a + b)


@given(pair_lists)
def test_count_level_matches_pmf_level(pairs):
    table = np.zeros((8, 8), dtype=np.int64)
    for a, b in pairs:
        table[a, b] += 1
    stats = joint_stats_from_table(table)
    j = joint_from_pairs(pairs)
    assert stats.h_x == pytest.approx(entropy(j.marginal_x()), abs=1e-12)
    assert stats.h_x_given_y == pytest.approx(conditional_entropy(j), abs=1e-12)
    assert stats.mi == pytest.approx(mutual_information(j), abs=1e-12)


def test_entropy_from_counts():
    assert entropy_from_counts([5, 0, 5]) == pytest.approx(1.0)
    assert entropy_from_counts([3, 1]) == pytest.approx(-(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25)))
    with pytest.raises(EmptySampleError):
        entropy_from_counts([0, 0])

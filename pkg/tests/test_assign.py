import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dmca.assign import brute_force_assignment, solve_max_assignment
from dmca.errors import InvalidData, SizeError


def test_diagonal():
    m = solve_max_assignment([[1, 0], [0, 1]])
    assert m.pairs == [(0, 0), (1, 1)]
    assert m.total == 2


def test_anti_diagonal():
    m = solve_max_assignment([[0, 1], [1, 0]])
    assert m.pairs == [(0, 1), (1, 0)]
    assert m.total == 2


def test_brute_force_trivial_cases():
    assert brute_force_assignment([[5]]).pairs == [(0, 0)]
    assert brute_force_assignment([[5]]).total == 5
    m = brute_force_assignment([[1, 2]])
    assert (m.pairs, m.total) == ([(0, 1)], 2)
    assert brute_force_assignment([[2, 2], [2, 2]]).pairs == [(0, 0), (1, 1)]


def test_tie_break_all_equal():
    assert solve_max_assignment([[2, 2], [2, 2]]).pairs == [(0, 0), (1, 1)]
    assert solve_max_assignment(np.zeros((3, 5))).pairs == [(0, 0), (1, 1), (2, 2)]
    assert solve_max_assignment(np.zeros((4, 2))).pairs == [(0, 0), (1, 1)]


def test_brute_force_size_limit():
    with pytest.raises(SizeError):
        brute_force_assignment(np.zeros((8, 8)))
    brute_force_assignment(np.zeros((3, 3)), max_n=3)


@pytest.mark.parametrize("bad", [np.nan, np.inf])
def test_rejects_non_finite(bad):
    with pytest.raises(InvalidData):
        solve_max_assignment([[1.0, bad]])
    with pytest.raises(InvalidData):
        brute_force_assignment([[1.0, bad]])


@pytest.mark.parametrize("shape", [(5, 5), (4, 6)])
def test_seeded_integer_matrices_match_enumeration(shape):
    rng = np.random.default_rng(sum(shape))
    for _ in range(200):
        s = rng.integers(-9, 10, size=shape).astype(float)
        fast, slow = solve_max_assignment(s), brute_force_assignment(s)
        assert fast.total == slow.total
        assert fast.pairs == slow.pairs


def test_maximum_cardinality_even_when_negative():
    m = solve_max_assignment([[-5, -1], [-2, -7]])
    assert len(m.pairs) == 2
    assert m.total == -3


def test_allow_unmatched_drops_negative_pairs():
    s = np.array([[-5.0, -1.0], [-2.0, 3.0]])
    m = solve_max_assignment(s, allow_unmatched=True)
    assert m.pairs == [(1, 1)]
    assert m.total == 3


def test_allow_unmatched_is_optimal_partial_matching():
    rng = np.random.default_rng(12)
    for _ in range(100):
        s = rng.integers(-6, 4, size=tuple(rng.integers(1, 5, size=2))).astype(float)
        m = solve_max_assignment(s, allow_unmatched=True)
        # exhaustive optimum over partial matchings equals optimum on max(s, 0)
        best = brute_force_assignment(np.maximum(s, 0)).total
        assert m.total == best
        assert all(s[i, j] >= 0 for i, j in m.pairs)


def test_larger_instance_is_consistent():
    rng = np.random.default_rng(3)
    s = rng.normal(size=(40, 55))
    m = solve_max_assignment(s)
    rows = [i for i, _ in m.pairs]
    cols = [j for _, j in m.pairs]
    assert len(set(rows)) == len(set(cols)) == 40
    # no improving 2-swap exists
    for a in range(40):
        for b in range(a + 1, 40):
            (i, j), (k, l) = m.pairs[a], m.pairs[b]
            assert s[i, j] + s[k, l] >= s[i, l] + s[k, j] - 1e-12


small_scores = st.integers(1, 6).flatmap(
    lambda r: st.integers(1, 6).flatmap(
        lambda c: arrays(np.float64, (r, c), elements=st.integers(-4, 4).map(float))
    )
)


@settings(max_examples=200, deadline=None)
@given(small_scores)
def test_oracle_equivalence_property(s):
    fast, slow = solve_max_assignment(s), brute_force_assignment(s)
    assert fast.total == slow.total
    assert fast.pairs == slow.pairs


@settings(max_examples=100, deadline=None)
@given(small_scores, st.integers(-20, 20))
def test_shift_invariance(s, shift):
    base = solve_max_assignment(s)
    shifted = solve_max_assignment(s + shift)
    assert shifted.pairs == base.pairs
    assert shifted.total == base.total + shift * len(base.pairs)


@settings(max_examples=100, deadline=None)
@given(small_scores)
def test_transposition_symmetry(s):
    a = solve_max_assignment(s)
    b = solve_max_assignment(s.T)
    assert a.total == b.total
    # the transposed pair set is an optimal matching of s.T
    assert sum(s.T[j, i] for i, j in a.pairs) == b.total


def test_transposition_pairs_without_ties():
    rng = np.random.default_rng(21)
    for _ in range(100):
        s = rng.normal(size=tuple(rng.integers(1, 8, size=2)))
        a = solve_max_assignment(s)
        b = solve_max_assignment(s.T)
        assert sorted((j, i) for i, j in a.pairs) == b.pairs
        assert a.total == pytest.approx(b.total, abs=1e-12)

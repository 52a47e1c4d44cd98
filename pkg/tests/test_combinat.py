import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metabandit.combinat import (StateIndexer, compositions,
                                 compositions_count, count_states,
                                 layer_transitions, rank_composition,
                                 total_states, unrank_composition)


def test_state_counts_match_direct_enumeration():
    # states at flight t are weak compositions of t-1 into 2K cells
    for K in (1, 2, 3):
        for t in (1, 2, 3, 4, 5):
            assert count_states(t, K) == sum(
                1 for _ in compositions(t - 1, 2 * K))


def test_total_states_is_sum_of_layers():
    for K in (2, 3):
        for T in (1, 4, 10):
            assert total_states(T, K) == sum(
                count_states(t, K) for t in range(1, T + 1))


def test_compositions_count_matches_enumeration():
    for D in (0, 1, 3, 5):
        for J in (1, 2, 4):
            assert compositions_count(D, J) == len(list(compositions(D, J)))


def test_compositions_are_lexicographic_and_sum_correctly():
    out = list(compositions(3, 3))
    assert out == sorted(out)
    assert all(sum(c) == 3 for c in out)
    assert len(set(out)) == len(out)


def test_rank_is_a_bijection_on_each_layer():
    for D, J in [(0, 3), (3, 2), (4, 4)]:
        ranks = [rank_composition(c) for c in compositions(D, J)]
        assert sorted(ranks) == list(range(compositions_count(D, J)))


def test_all_zero_composition_has_rank_zero():
    assert rank_composition((0, 0, 0, 0)) == 0
    assert unrank_composition(0, 4, 0) == (0, 0, 0, 0)


@given(st.integers(1, 5).flatmap(
    lambda j: st.lists(st.integers(0, 6), min_size=j, max_size=j)))
@settings(max_examples=200)
def test_rank_unrank_roundtrip(parts):
    parts = tuple(parts)
    r = rank_composition(parts)
    assert unrank_composition(sum(parts), len(parts), r) == parts


def test_state_indexer_roundtrip():
    idx = StateIndexer(2, 4)
    for s in range(5):
        for r in range(idx.layer_size(s)):
            on_time, delayed = idx.unrank(s, r)
            assert sum(on_time) + sum(delayed) == s
            assert idx.rank(on_time, delayed) == r


def test_layer_transitions_point_to_correct_children():
    K = 2
    idx = StateIndexer(K, 5)
    for s in (0, 1, 3):
        on_time, delayed, succ, fail = layer_transitions(K, s)
        for r in range(idx.layer_size(s)):
            ot, dl = idx.unrank(s, r)
            assert tuple(on_time[r]) == ot
            assert tuple(delayed[r]) == dl
            for k in range(K):
                ot_s = tuple(ot[i] + (i == k) for i in range(K))
                assert idx.rank(ot_s, dl) == succ[r, k]
                dl_f = tuple(dl[i] + (i == k) for i in range(K))
                assert idx.rank(ot, dl_f) == fail[r, k]


def test_layer_transition_arrays_are_read_only():
    arrays = layer_transitions(3, 2)
    for arr in arrays:
        with pytest.raises(ValueError):
            arr[0, 0] = 99


def test_invalid_arguments_rejected():
    with pytest.raises(ValueError):
        count_states(0, 3)
    with pytest.raises(ValueError):
        compositions_count(-1, 2)
    with pytest.raises(IndexError):
        unrank_composition(2, 2, compositions_count(2, 2))

"""Stars-and-bars machinery for the solver's state space.

Count states with ``s`` total observations are weak compositions of ``s``
into 2K cells (one on-time and one delay cell per airline).  The solver
stores values in dense per-layer arrays, so we need an exact bijection
between compositions and array indices (colexicographic ranking via the
combinadic) plus precomputed transition tables per layer.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

_INT64_MAX = 2**63 - 1


def _comb64(n: int, k: int) -> int:
    v = math.comb(n, k)
    if v > _INT64_MAX:
        raise OverflowError(f"C({n},{k}) exceeds 64-bit range")
    return v


def count_states(t: int, K: int) -> int:
    """Number of feasible count states at flight ``t`` with ``K`` airlines."""
    if t < 1 or K < 1:
        raise ValueError("t and K must be positive")
    return _comb64(t + 2 * K - 2, 2 * K - 1)


def total_states(T: int, K: int) -> int:
    """Total states over flights 1..T; equals sum of count_states by the hockey-stick identity."""
    if T < 1 or K < 1:
        raise ValueError("T and K must be positive")
    return _comb64(T + 2 * K - 1, 2 * K)


def compositions_count(D: int, J: int) -> int:
    """Number of weak compositions of D into J parts."""
    if D < 0 or J < 1:
        raise ValueError("need D >= 0 and J >= 1")
    return _comb64(D + J - 1, J - 1)


def compositions(D: int, J: int) -> Iterator[tuple[int, ...]]:
    """Yield all weak compositions of D into J parts in lexicographic order."""
    if D < 0 or J < 1:
        raise ValueError("need D >= 0 and J >= 1")
    if J == 1:
        yield (D,)
        return
    for first in range(D + 1):
        for rest in compositions(D - first, J - 1):
            yield (first,) + rest


def rank_composition(parts: Sequence[int]) -> int:
    """Colex rank of a weak composition among all compositions of the same sum and length.

    Uses the stars-and-bars bijection: a composition (c_1..c_p) of n maps to
    the bar-position subset {d_i = c_1+..+c_i + i - 1}, whose colex rank is
    sum_i C(d_i, i).  The all-zero composition has rank 0.
    """
    rank = 0
    prefix = 0
    for i in range(1, len(parts)):
        prefix += parts[i - 1]
        rank += math.comb(prefix + i - 1, i)
    return rank


def unrank_composition(total: int, p: int, rank: int) -> tuple[int, ...]:
    """Inverse of :func:`rank_composition` for compositions of ``total`` into ``p`` parts."""
    n_comps = compositions_count(total, p)
    if not 0 <= rank < n_comps:
        raise IndexError(f"rank {rank} out of range for {n_comps} compositions")
    if p == 1:
        return (total,)
    # combinadic decoding, largest bar position first
    bars = [0] * (p - 1)
    r = rank
    d = total + p - 2
    for i in range(p - 1, 0, -1):
        while math.comb(d, i) > r:
            d -= 1
        r -= math.comb(d, i)
        bars[i - 1] = d
        d -= 1
    parts = [0] * p
    prev = 0
    for i in range(1, p):
        s_i = bars[i - 1] - (i - 1)
        parts[i - 1] = s_i - prev
        prev = s_i
    parts[p - 1] = total - prev
    return tuple(parts)


class StateIndexer:
    """Bijection between count states and dense per-layer indices.

    A state is the pair of K-vectors (on_time, delayed); its layer is the
    total observation count.  Cells are ordered (on_time_1..on_time_K,
    delayed_1..delayed_K) and ranked colexicographically.
    """

    def __init__(self, K: int, max_sum: int):
        if K < 1 or max_sum < 0:
            raise ValueError("need K >= 1 and max_sum >= 0")
        self.K = K
        self.max_sum = max_sum

    def layer_size(self, s: int) -> int:
        return count_states(s + 1, self.K)

    def rank(self, on_time: Sequence[int], delayed: Sequence[int]) -> int:
        s = sum(on_time) + sum(delayed)
        if s > self.max_sum:
            raise ValueError(f"state sum {s} exceeds max_sum {self.max_sum}")
        return rank_composition(tuple(on_time) + tuple(delayed))

    def unrank(self, s: int, rank: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        if s > self.max_sum:
            raise ValueError(f"layer {s} exceeds max_sum {self.max_sum}")
        cells = unrank_composition(s, 2 * self.K, rank)
        return cells[: self.K], cells[self.K:]


@lru_cache(maxsize=None)
def layer_transitions(K: int, s: int):
    """Precomputed arrays for the layer with observation sum ``s``.

    Returns (on_time, delayed, succ, fail): each of shape (S, K) where S is
    the layer size.  ``succ[r, k]`` / ``fail[r, k]`` are the ranks, within
    layer s+1, of the children reached by an on-time / delayed outcome with
    airline k.
    """
    p = 2 * K
    S = count_states(s + 1, K)
    on_time = np.empty((S, K), dtype=np.int64)
    delayed = np.empty((S, K), dtype=np.int64)
    succ = np.empty((S, K), dtype=np.int64)
    fail = np.empty((S, K), dtype=np.int64)
    for r in range(S):
        cells = list(unrank_composition(s, p, r))
        for k in range(K):
            on_time[r, k] = cells[k]
            delayed[r, k] = cells[K + k]
        for k in range(K):
            cells[k] += 1
            succ[r, k] = rank_composition(cells)
            cells[k] -= 1
            cells[K + k] += 1
            fail[r, k] = rank_composition(cells)
            cells[K + k] -= 1
    for arr in (on_time, delayed, succ, fail):
        arr.setflags(write=False)
    return on_time, delayed, succ, fail

"""Finite-horizon backward induction over count states.

One generic solver covers every planning model in the package: a planner is
characterized by a probability vector over prior hypotheses (a *mixture*),
and the mixture enters the recursion only through the mixture-weighted
posterior-mean table.  A point-mass mixture on a single hypothesis recovers
independent-prior planning; the full hyper-posterior recovers transfer
planning; sampled weight vectors recover the bounded-sample planner.

The solver is batched over mixtures: values are computed for ``n_mix``
mixtures at once with the leading axis indexing the mixture.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .beliefs import CountState, HypothesisClass, hypothesis_mean_tables
from .combinat import StateIndexer, layer_transitions

#: absolute tolerance for treating action values as tied under greedy rules
TIE_TOL = 1e-10


@dataclass(frozen=True)
class EpsGreedy:
    """With prob. 1-epsilon play a best action, else uniform at random."""

    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")


@dataclass(frozen=True)
class Softmax:
    """Play action k with probability proportional to exp(value_k / tau)."""

    tau: float

    def __post_init__(self):
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")


DecisionRule = Union[EpsGreedy, Softmax]


def choice_probabilities(values: np.ndarray, rule: DecisionRule) -> np.ndarray:
    """Action probabilities implied by a rule, for values of shape (..., K).

    Greedy ties (within ``TIE_TOL`` of the maximum) split the greedy mass
    uniformly among the tied actions.
    """
    values = np.asarray(values, dtype=float)
    K = values.shape[-1]
    if isinstance(rule, EpsGreedy):
        best = values.max(axis=-1, keepdims=True)
        tied = values >= best - TIE_TOL
        greedy = tied / tied.sum(axis=-1, keepdims=True)
        return (1.0 - rule.epsilon) * greedy + rule.epsilon / K
    shifted = values / rule.tau
    shifted = shifted - shifted.max(axis=-1, keepdims=True)
    w = np.exp(shifted)
    return w / w.sum(axis=-1, keepdims=True)


def continuation_value(values: np.ndarray, rule: DecisionRule) -> np.ndarray:
    """Expected next-step value under the rule's own action distribution."""
    values = np.asarray(values, dtype=float)
    if isinstance(rule, EpsGreedy):
        K = values.shape[-1]
        return ((1.0 - rule.epsilon) * values.max(axis=-1)
                + (rule.epsilon / K) * values.sum(axis=-1))
    return (choice_probabilities(values, rule) * values).sum(axis=-1)


def _as_mixture_matrix(mixtures, J: int) -> np.ndarray:
    mix = np.atleast_2d(np.asarray(mixtures, dtype=float))
    if mix.shape[1] != J:
        raise ValueError(f"mixtures must have {J} columns, got {mix.shape[1]}")
    if np.any(mix < -1e-12):
        raise ValueError("mixture weights must be non-negative")
    sums = mix.sum(axis=1)
    if not np.allclose(sums, 1.0, atol=1e-9):
        raise ValueError("mixture weights must sum to one")
    return mix


def point_mass(j: int, J: int) -> np.ndarray:
    """Weight vector putting all mass on hypothesis j."""
    w = np.zeros(J)
    w[j] = 1.0
    return w


class ValueTable:
    """Action values for every state in a window of count-sum layers.

    ``layers[s]`` is an array of shape (n_mix, S_s, K) holding the value of
    each action at each state with total count ``s`` (states ordered by the
    package's composition ranking), for each mixture in the batch.
    """

    def __init__(self, cls: HypothesisClass, mixtures: np.ndarray,
                 rule: DecisionRule, gamma: float,
                 first_sum: int, last_sum: int,
                 layers: dict[int, np.ndarray]):
        self.cls = cls
        self.mixtures = mixtures
        self.rule = rule
        self.gamma = gamma
        self.first_sum = first_sum
        self.last_sum = last_sum
        self.layers = layers
        self._indexers = {s: StateIndexer(cls.K, s) for s in layers}

    @property
    def n_mix(self) -> int:
        return self.mixtures.shape[0]

    def action_values(self, counts: CountState, mix: int = 0) -> np.ndarray:
        """Values of the K actions at a count state, shape (K,)."""
        s = counts.total
        if s not in self.layers:
            raise KeyError(f"count sum {s} outside solved window "
                           f"[{self.first_sum}, {self.last_sum}]")
        rank = self._indexers[s].rank(counts.on_time, counts.delayed)
        return self.layers[s][mix, rank]

    def choice_probs(self, counts: CountState, mix: int = 0) -> np.ndarray:
        return choice_probabilities(self.action_values(counts, mix), self.rule)


def solve_window(cls: HypothesisClass, mixtures, rule: DecisionRule,
                 gamma: float, first_sum: int, last_sum: int) -> ValueTable:
    """Backward induction from layer ``last_sum`` down to ``first_sum``.

    Layer ``s`` holds all states with total count ``s`` (the state faced on
    flight ``s + 1``).  States in the final layer are valued myopically by
    the mixture-weighted posterior mean; earlier layers add the discounted
    continuation value under the decision rule.
    """
    if not 0 <= first_sum <= last_sum:
        raise ValueError("need 0 <= first_sum <= last_sum")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    mix = _as_mixture_matrix(mixtures, cls.J)
    K = cls.K

    # (J, K, C, C) posterior-mean table -> (n_mix, K, C, C) weighted mix
    tables = hypothesis_mean_tables(cls, last_sum)
    mixed = np.tensordot(mix, tables, axes=([1], [0]))
    k_idx = np.arange(K)[None, :]

    def layer_means(s: int) -> np.ndarray:
        on_time, delayed, _, _ = layer_transitions(K, s)
        # fancy-index (S, K) count pairs into (n_mix, K, C, C) -> (n_mix, S, K)
        return mixed[:, k_idx, on_time, delayed]

    layers: dict[int, np.ndarray] = {}
    V = layer_means(last_sum)
    layers[last_sum] = V
    for s in range(last_sum - 1, first_sum - 1, -1):
        W = continuation_value(V, rule)  # (n_mix, S_{s+1})
        _, _, succ, fail = layer_transitions(K, s)
        w_succ = W[:, succ]  # (n_mix, S_s, K)
        w_fail = W[:, fail]
        theta = layer_means(s)
        V = theta * (1.0 + gamma * (w_succ - w_fail)) + gamma * w_fail
        layers[s] = V
    return ValueTable(cls, mix, rule, gamma, first_sum, last_sum, layers)


def solve_backward(cls: HypothesisClass, mixtures, rule: DecisionRule,
                   gamma: float, T: int) -> ValueTable:
    """Solve the full horizon: all layers for flights 1..T."""
    return solve_window(cls, mixtures, rule, gamma, 0, T - 1)

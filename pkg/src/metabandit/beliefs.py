"""Beta-Bernoulli belief updating within a route and hyper-posterior updating across routes.

All evidence arithmetic stays in log space: the raw Gamma-ratio form of the
Beta-Binomial marginal likelihood overflows for count totals in the
hundreds, while log-gamma differences are stable everywhere we need them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class CountState:
    """Per-airline on-time / delayed counts within a route."""

    on_time: tuple[int, ...]
    delayed: tuple[int, ...]

    def __post_init__(self):
        if len(self.on_time) != len(self.delayed):
            raise ValueError("on_time and delayed must have equal length")
        if any(c < 0 for c in self.on_time + self.delayed):
            raise ValueError("counts must be nonnegative")

    @staticmethod
    def empty(K: int) -> "CountState":
        return CountState((0,) * K, (0,) * K)

    @property
    def K(self) -> int:
        return len(self.on_time)

    @property
    def total(self) -> int:
        return sum(self.on_time) + sum(self.delayed)

    @property
    def flight(self) -> int:
        """1-based flight index implied by the counts."""
        return self.total + 1


@dataclass(frozen=True)
class PriorHypothesis:
    """One candidate assignment of per-airline Beta priors."""

    alphas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        if len(self.alphas) != len(self.betas):
            raise ValueError("alphas and betas must have equal length")
        if any(a <= 0 for a in self.alphas) or any(b <= 0 for b in self.betas):
            raise ValueError("Beta shapes must be positive")

    @property
    def K(self) -> int:
        return len(self.alphas)


@dataclass(frozen=True)
class HypothesisClass:
    """Ordered finite set of prior hypotheses, all over the same K airlines."""

    hypotheses: tuple[PriorHypothesis, ...]
    mean_grid: tuple[float, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.hypotheses:
            raise ValueError("need at least one hypothesis")
        K = self.hypotheses[0].K
        if any(h.K != K for h in self.hypotheses):
            raise ValueError("all hypotheses must share K")

    @property
    def J(self) -> int:
        return len(self.hypotheses)

    @property
    def K(self) -> int:
        return self.hypotheses[0].K

    def alpha_matrix(self) -> np.ndarray:
        return np.array([h.alphas for h in self.hypotheses])

    def beta_matrix(self) -> np.ndarray:
        return np.array([h.betas for h in self.hypotheses])

    def to_json(self) -> dict:
        out = {"hypotheses": [{"alphas": list(h.alphas), "betas": list(h.betas)}
                              for h in self.hypotheses]}
        if self.mean_grid is not None:
            out["mean_grid"] = list(self.mean_grid)
        return out

    @staticmethod
    def from_json(doc: dict) -> "HypothesisClass":
        hyps = tuple(PriorHypothesis(tuple(h["alphas"]), tuple(h["betas"]))
                     for h in doc["hypotheses"])
        grid = tuple(doc["mean_grid"]) if "mean_grid" in doc else None
        return HypothesisClass(hyps, mean_grid=grid)


@dataclass(frozen=True)
class HyperPosterior:
    """Probability weights over the hypotheses of a class."""

    weights: tuple[float, ...]

    def __post_init__(self):
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > WEIGHT_TOL:
            raise ValueError("weights must sum to 1")

    @staticmethod
    def uniform(J: int) -> "HyperPosterior":
        return HyperPosterior((1.0 / J,) * J)

    def as_array(self) -> np.ndarray:
        return np.array(self.weights)

    @property
    def J(self) -> int:
        return len(self.weights)


def update_counts(counts: CountState, k: int, outcome: int) -> CountState:
    """Increment the chosen airline's on-time (outcome=1) or delay (outcome=0) count."""
    if not 0 <= k < counts.K:
        raise IndexError(f"airline index {k} out of range")
    if outcome not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    if outcome == 1:
        on = tuple(c + (i == k) for i, c in enumerate(counts.on_time))
        return CountState(on, counts.delayed)
    de = tuple(c + (i == k) for i, c in enumerate(counts.delayed))
    return CountState(counts.on_time, de)


def posterior_mean(hyp: PriorHypothesis, counts: CountState, k: int) -> float:
    """Posterior mean on-time rate of airline k under the hypothesis's Beta prior."""
    if not 0 <= k < counts.K:
        raise IndexError(f"airline index {k} out of range")
    a = hyp.alphas[k] + counts.on_time[k]
    b = hyp.betas[k] + counts.delayed[k]
    return a / (a + b)


def route_evidence_log(hyp: PriorHypothesis, counts: CountState) -> float:
    """Log Beta-Binomial marginal likelihood of the route counts under one hypothesis.

    Airlines never flown contribute a factor of exactly 1 (an empty
    Beta-Binomial), which the log-gamma expression yields automatically.
    """
    a = np.asarray(hyp.alphas, dtype=float)
    b = np.asarray(hyp.betas, dtype=float)
    npos = np.asarray(counts.on_time, dtype=float)
    nneg = np.asarray(counts.delayed, dtype=float)
    return float(np.sum(
        gammaln(a + b) - gammaln(a) - gammaln(b)
        + gammaln(a + npos) + gammaln(b + nneg) - gammaln(a + b + npos + nneg)
    ))


def class_evidence_logs(cls: HypothesisClass, counts: CountState) -> np.ndarray:
    """Vector of log evidences, one per hypothesis in the class."""
    a = cls.alpha_matrix()
    b = cls.beta_matrix()
    npos = np.asarray(counts.on_time, dtype=float)
    nneg = np.asarray(counts.delayed, dtype=float)
    return np.sum(
        gammaln(a + b) - gammaln(a) - gammaln(b)
        + gammaln(a + npos) + gammaln(b + nneg) - gammaln(a + b + npos + nneg),
        axis=1,
    )


def hyper_posterior_update(Q: HyperPosterior, cls: HypothesisClass,
                           route_counts: CountState) -> HyperPosterior:
    """Bayes update of the hyper-posterior from one completed route's counts."""
    if Q.J != cls.J:
        raise ValueError("hyper-posterior and class dimensions disagree")
    logq = np.full(cls.J, -np.inf)
    w = Q.as_array()
    pos = w > 0
    logq[pos] = np.log(w[pos]) + class_evidence_logs(cls, route_counts)[pos]
    norm = logsumexp(logq)
    if not np.isfinite(norm):
        raise FloatingPointError("hyper-posterior update underflowed to zero mass")
    out = np.exp(logq - norm)
    out /= out.sum()
    return HyperPosterior(tuple(out))


def build_hypothesis_grid(mean_grid: Sequence[float], K: int) -> HypothesisClass:
    """All ordered K-tuples over a mean grid, each mean mu mapped to Beta(mu, 1-mu).

    Enumeration is lexicographic over grid indices so hypothesis indices are
    stable across runs and serializations.
    """
    grid = tuple(mean_grid)
    if not grid:
        raise ValueError("mean grid must be non-empty")
    if any(not 0.0 < g < 1.0 for g in grid):
        raise ValueError("grid means must lie strictly in (0, 1)")
    hyps = tuple(
        PriorHypothesis(tuple(mus), tuple(1.0 - m for m in mus))
        for mus in itertools.product(grid, repeat=K)
    )
    return HypothesisClass(hyps, mean_grid=grid)


@lru_cache(maxsize=None)
def hypothesis_mean_tables(cls: HypothesisClass, max_count: int) -> np.ndarray:
    """Posterior-mean lookup, shape (J, K, max_count+1, max_count+1).

    Entry [j, k, p, n] is the posterior mean of airline k under hypothesis j
    after p on-time and n delayed observations.  The solver mixes these
    tables with hypothesis weights, which is all any mixture needs.
    """
    a = cls.alpha_matrix()[:, :, None, None]
    b = cls.beta_matrix()[:, :, None, None]
    p = np.arange(max_count + 1, dtype=float)[None, None, :, None]
    n = np.arange(max_count + 1, dtype=float)[None, None, None, :]
    table = (a + p) / (a + b + p + n)
    table.setflags(write=False)
    return table

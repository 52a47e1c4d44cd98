"""Choice-sequence likelihoods for the three planning models.

Given an observed history of airline choices and outcomes, these functions
score how likely each planner was to produce exactly those choices.  The
independent and full-transfer planners have deterministic planning mixtures,
so their likelihoods are closed-form products of per-flight choice
probabilities.  The bounded-sample planner's mixture is random, so each
route's likelihood is an expectation over hypothesis draws: computed exactly
by enumerating all draw outcomes when feasible, or by Monte Carlo otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp, xlogy

from .beliefs import (CountState, HypothesisClass, HyperPosterior,
                      hyper_posterior_update, update_counts)
from .combinat import compositions, compositions_count
from .dp import DecisionRule, choice_probabilities, solve_window
from .policies import cached_window, uninformative_class, window_bounds

# enumerate all draw outcomes (instead of sampling rows) up to this many
_ENUM_CAP = 512
# mixture batch size for backward-induction solves
_CHUNK = 256


@dataclass
class ChoiceHistory:
    """Observed choices and outcomes, both (M, T) with 0-based airlines."""

    choices: np.ndarray
    outcomes: np.ndarray

    def __post_init__(self):
        self.choices = np.asarray(self.choices, dtype=int)
        self.outcomes = np.asarray(self.outcomes, dtype=int)
        if self.choices.shape != self.outcomes.shape or self.choices.ndim != 2:
            raise ValueError("choices and outcomes must be equal-shape (M, T)")
        if not np.isin(self.outcomes, (0, 1)).all():
            raise ValueError("outcomes must be 0 or 1")

    @property
    def M(self) -> int:
        return self.choices.shape[0]

    @property
    def T(self) -> int:
        return self.choices.shape[1]

    @staticmethod
    def from_session(record) -> "ChoiceHistory":
        return ChoiceHistory(record.choices_matrix(), record.outcomes_matrix())

    def route_final_counts(self, m: int, K: int) -> CountState:
        counts = CountState.empty(K)
        for t in range(self.T):
            counts = update_counts(counts, int(self.choices[m - 1, t]),
                                   int(self.outcomes[m - 1, t]))
        return counts


def hyper_sequence(cls: HypothesisClass, history: ChoiceHistory) -> list[np.ndarray]:
    """Pre-route hyper-posterior weights for each route, starting uniform."""
    Q = HyperPosterior.uniform(cls.J)
    seq = [Q.as_array()]
    for m in range(1, history.M):
        counts = history.route_final_counts(m, cls.K)
        Q = hyper_posterior_update(Q, cls, counts)
        seq.append(Q.as_array())
    return seq


def path_logprob_from_table(table, rule: DecisionRule,
                            choices: np.ndarray,
                            outcomes: np.ndarray) -> np.ndarray:
    """Log-probability of a choice path under a pre-solved full-horizon
    value table, per mixture in the table's batch; shape (n_mix,)."""
    K = table.cls.K
    counts = CountState.empty(K)
    total = np.zeros(table.n_mix)
    with np.errstate(divide="ignore"):
        for t in range(len(choices)):
            values = table.action_values(counts, mix=slice(None))
            probs = choice_probabilities(values, rule)  # (n_mix, K)
            k = int(choices[t])
            total += np.log(probs[:, k])
            counts = update_counts(counts, k, int(outcomes[t]))
    return total


def route_log_probs(cls: HypothesisClass, mixtures, rule: DecisionRule,
                    gamma: float, lookahead: int | None,
                    choices: np.ndarray, outcomes: np.ndarray,
                    use_cache: bool = False) -> np.ndarray:
    """Log-probability of one route's choice sequence per mixture.

    ``choices``/``outcomes`` are the (T,) rows for the route; the result has
    shape (n_mix,).  With an infinitely greedy rule a non-greedy observed
    choice yields -inf.
    """
    mixtures = np.atleast_2d(np.asarray(mixtures, dtype=float))
    n_mix = mixtures.shape[0]
    if n_mix > _CHUNK and not use_cache:
        return np.concatenate([
            route_log_probs(cls, mixtures[i:i + _CHUNK], rule, gamma,
                            lookahead, choices, outcomes)
            for i in range(0, n_mix, _CHUNK)])
    T = len(choices)
    counts = CountState.empty(cls.K)
    total = np.zeros(n_mix)
    table = None
    with np.errstate(divide="ignore"):
        for t in range(1, T + 1):
            s = counts.total
            first, last = window_bounds(s, T, lookahead)
            if table is None or s not in table.layers:
                if use_cache:
                    table = cached_window(cls, mixtures, rule, gamma, first, last)
                else:
                    table = solve_window(cls, mixtures, rule, gamma, first, last)
            values = table.action_values(counts, mix=slice(None))
            probs = choice_probabilities(values, rule)  # (n_mix, K)
            k = int(choices[t - 1])
            total += np.log(probs[:, k])
            counts = update_counts(counts, k, int(outcomes[t - 1]))
            if lookahead is not None:
                table = None
    return total


def loglik_independent(history: ChoiceHistory, rule: DecisionRule,
                       gamma: float = 1.0, lookahead: int | None = None,
                       K: int | None = None) -> float:
    """Log-likelihood under the no-transfer planner (Beta(1,1) priors)."""
    K = K or int(history.choices.max()) + 1
    cls = uninformative_class(K)
    one = np.ones((1, 1))
    return float(sum(
        route_log_probs(cls, one, rule, gamma, lookahead,
                        history.choices[m], history.outcomes[m],
                        use_cache=True)[0]
        for m in range(history.M)))


def loglik_transfer(cls: HypothesisClass, history: ChoiceHistory,
                    rule: DecisionRule, gamma: float = 1.0,
                    lookahead: int | None = None) -> float:
    """Log-likelihood under the full hyper-posterior (transfer) planner.

    With a full-horizon planner, all routes' hyper-posterior mixtures are
    solved in one batched backward induction.
    """
    Qs = np.stack(hyper_sequence(cls, history))
    if lookahead is None:
        table = solve_window(cls, Qs, rule, gamma, 0, history.T - 1)
        return float(sum(
            path_logprob_from_table(table, rule, history.choices[m],
                                    history.outcomes[m])[m]
            for m in range(history.M)))
    # truncated horizon: the window depends only on the flight index, so all
    # routes share one batched solve per flight
    counts = [CountState.empty(cls.K) for _ in range(history.M)]
    total = 0.0
    with np.errstate(divide="ignore"):
        for t in range(history.T):
            first, last = window_bounds(t, history.T, lookahead)
            table = solve_window(cls, Qs, rule, gamma, first, last)
            for m in range(history.M):
                values = table.action_values(counts[m], mix=m)
                probs = choice_probabilities(values, rule)
                k = int(history.choices[m, t])
                total += np.log(probs[k])
                counts[m] = update_counts(counts[m], k,
                                          int(history.outcomes[m, t]))
    return float(total)


def _multinomial_logpmf(counts: np.ndarray, D: int, q: np.ndarray) -> np.ndarray:
    """Log pmf of Multinomial(D, q) at integer count rows (n, J)."""
    return (gammaln(D + 1) - gammaln(counts + 1).sum(axis=1)
            + xlogy(counts, q[None, :]).sum(axis=1))


def loglik_bounded_exact(cls: HypothesisClass, D: int, history: ChoiceHistory,
                         rule: DecisionRule, gamma: float = 1.0,
                         lookahead: int | None = None) -> float:
    """Exact log-likelihood of the bounded planner with ``D`` draws.

    Sums over every possible draw outcome (weak composition of D over the
    hypotheses); feasible only when that space is small.
    """
    comps = np.array(list(compositions(D, cls.J)), dtype=int)
    mixtures = comps / D
    total = 0.0
    for m, Q in enumerate(hyper_sequence(cls, history), start=1):
        logw = _multinomial_logpmf(comps, D, Q)
        logp = route_log_probs(cls, mixtures, rule, gamma, lookahead,
                               history.choices[m - 1], history.outcomes[m - 1])
        total += logsumexp(logw + logp)
    return float(total)


def _log_mean_and_se(logp: np.ndarray, weights: np.ndarray,
                     B: int) -> tuple[float, float]:
    """Log of a weighted sample mean of exp(logp), plus the standard error
    of that log (delta method), with max-shifting for stability."""
    finite = np.isfinite(logp) & (weights > 0)
    if not finite.any():
        return -np.inf, np.inf
    shift = logp[finite].max()
    q = np.where(finite, np.exp(logp - shift, where=finite, out=np.zeros_like(logp)), 0.0)
    mean_q = float(np.dot(weights, q) / B)
    if mean_q == 0.0:
        return -np.inf, np.inf
    sumsq = float(np.dot(weights, q * q))
    var_q = max(sumsq - B * mean_q ** 2, 0.0) / (B - 1)
    se_log = np.sqrt(var_q / B) / mean_q
    return shift + np.log(mean_q), float(se_log)


def loglik_bounded_mc(cls: HypothesisClass, D: int, history: ChoiceHistory,
                      rule: DecisionRule, B: int, rng: np.random.Generator,
                      gamma: float = 1.0, lookahead: int | None = None,
                      use_cache: bool = False) -> tuple[float, float]:
    """Monte Carlo log-likelihood of the bounded planner with ``D`` draws.

    Each route's likelihood is estimated by the log of the mean of ``B``
    per-draw path probabilities (max-shifted).  Returns the total log
    estimate and a delta-method standard error (routes combined in
    quadrature).  The estimate is biased downward at small ``B``.

    When the draw-outcome space is small the ``B`` draws are generated as
    one multinomial over outcomes, which is distributionally identical to
    ``B`` independent draws but lets each distinct mixture be solved once.
    """
    if B < 2:
        raise ValueError("need at least two Monte Carlo draws")
    total, var_sum = 0.0, 0.0
    try:
        enumerable = compositions_count(D, cls.J) <= _ENUM_CAP
    except OverflowError:
        enumerable = False
    if enumerable:
        comps = np.array(list(compositions(D, cls.J)), dtype=int)
        all_mixtures = comps / D
    for m, Q in enumerate(hyper_sequence(cls, history), start=1):
        if enumerable:
            pmf = np.exp(_multinomial_logpmf(comps, D, Q))
            pmf = np.clip(pmf, 0.0, None)
            pmf = pmf / pmf.sum()
            weights = rng.multinomial(B, pmf).astype(float)
            logp = route_log_probs(cls, all_mixtures, rule, gamma, lookahead,
                                   history.choices[m - 1],
                                   history.outcomes[m - 1],
                                   use_cache=use_cache)
        else:
            draws = rng.multinomial(D, Q, size=B)
            uniq, counts = np.unique(draws, axis=0, return_counts=True)
            weights = counts.astype(float)
            logp = route_log_probs(cls, uniq / D, rule, gamma, lookahead,
                                   history.choices[m - 1],
                                   history.outcomes[m - 1])
        ll_m, se_m = _log_mean_and_se(logp, weights, B)
        total += ll_m
        var_sum += se_m ** 2
    return float(total), float(np.sqrt(var_sum))

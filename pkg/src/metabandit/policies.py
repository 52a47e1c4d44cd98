"""Planning policies over the hierarchical flight environment.

Three planners share one backward-induction engine and differ only in the
hypothesis mixture they plan with on each route:

- ``dp``      plans with a single uninformative Beta(1, 1) prior per airline
              and never transfers anything across routes;
- ``metadp``  plans with the full hyper-posterior over the hypothesis class,
              updated after every completed route;
- ``brmdp``   draws ``num_draws`` hypothesis samples from the hyper-posterior
              at the start of each route and plans with their empirical
              frequencies; the hyper-posterior itself is still updated
              exactly between routes.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .beliefs import (CountState, HypothesisClass, HyperPosterior,
                      PriorHypothesis, hyper_posterior_update)
from .dp import DecisionRule, ValueTable, choice_probabilities, solve_window

POLICY_KINDS = ("dp", "metadp", "brmdp")


@lru_cache(maxsize=None)
def uninformative_class(K: int) -> HypothesisClass:
    """Single-hypothesis class with a Beta(1, 1) prior for each airline."""
    return HypothesisClass((PriorHypothesis((1.0,) * K, (1.0,) * K),))


@dataclass(frozen=True)
class PolicySpec:
    """Configuration of one planner.

    ``lookahead`` of ``None`` plans over the full remaining horizon; an
    integer ``h`` plans only ``h`` flights ahead and re-solves each flight.
    """

    kind: str
    rule: DecisionRule
    gamma: float = 1.0
    lookahead: int | None = None
    num_draws: int | None = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"kind must be one of {POLICY_KINDS}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.lookahead is not None and self.lookahead < 1:
            raise ValueError("lookahead must be at least one flight")
        if self.kind == "brmdp":
            if self.num_draws is None or self.num_draws < 1:
                raise ValueError("brmdp requires num_draws >= 1")
        elif self.num_draws is not None:
            raise ValueError("num_draws only applies to brmdp")


# Bounded FIFO cache of solved windows, shared across planners so repeated
# mixtures (e.g. point-mass draws) are solved once.
_VALUE_CACHE: OrderedDict = OrderedDict()
_VALUE_CACHE_MAX = 512


def clear_value_cache() -> None:
    _VALUE_CACHE.clear()


def cached_window(cls: HypothesisClass, mixture: np.ndarray,
                  rule: DecisionRule, gamma: float,
                  first_sum: int, last_sum: int) -> ValueTable:
    mixture = np.asarray(mixture, dtype=float)
    key = (cls, mixture.tobytes(), rule, gamma, first_sum, last_sum)
    table = _VALUE_CACHE.get(key)
    if table is None:
        table = solve_window(cls, mixture, rule, gamma, first_sum, last_sum)
        _VALUE_CACHE[key] = table
        if len(_VALUE_CACHE) > _VALUE_CACHE_MAX:
            _VALUE_CACHE.popitem(last=False)
    return table


def window_bounds(s: int, T: int, lookahead: int | None) -> tuple[int, int]:
    """Layer window to solve when the current count sum is ``s``."""
    if lookahead is None:
        return 0, T - 1
    return s, min(s + lookahead, T) - 1


class Planner:
    """Stateful planner for one simulated participant.

    Call :meth:`start_route` before each route (the bounded planner draws
    its hypothesis sample here), :meth:`choose`/:meth:`choice_probs` during
    the route, and :meth:`finish_route` with the route's final counts.
    """

    def __init__(self, spec: PolicySpec, cls: HypothesisClass, T: int):
        self.spec = spec
        self.cls = cls
        self.T = T
        self.plan_cls = uninformative_class(cls.K) if spec.kind == "dp" else cls
        self.hyper = HyperPosterior.uniform(cls.J)
        self._mixture: np.ndarray | None = None

    def start_route(self, rng: np.random.Generator | None = None) -> np.ndarray:
        """Fix the planning mixture for the coming route and return it."""
        if self.spec.kind == "dp":
            self._mixture = np.ones(1)
        elif self.spec.kind == "metadp":
            self._mixture = self.hyper.as_array()
        else:
            if rng is None:
                raise ValueError("brmdp needs an rng to draw hypotheses")
            draws = rng.multinomial(self.spec.num_draws, self.hyper.as_array())
            self._mixture = draws / self.spec.num_draws
        return self._mixture

    @property
    def mixture(self) -> np.ndarray:
        if self._mixture is None:
            raise RuntimeError("start_route() has not been called")
        return self._mixture

    def action_values(self, counts: CountState) -> np.ndarray:
        first, last = window_bounds(counts.total, self.T, self.spec.lookahead)
        table = cached_window(self.plan_cls, self.mixture, self.spec.rule,
                              self.spec.gamma, first, last)
        return table.action_values(counts)

    def choice_probs(self, counts: CountState) -> np.ndarray:
        return choice_probabilities(self.action_values(counts), self.spec.rule)

    def choose(self, counts: CountState, rng: np.random.Generator) -> int:
        probs = self.choice_probs(counts)
        return int(rng.choice(len(probs), p=probs))

    def finish_route(self, counts: CountState) -> None:
        """Fold a completed route's counts into the hyper-posterior."""
        if self.spec.kind != "dp":
            self.hyper = hyper_posterior_update(self.hyper, self.cls, counts)

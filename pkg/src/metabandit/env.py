"""Hierarchical Bernoulli-Beta environment: specs, moment conversion, sampling.

Randomness is counter-based: every draw comes from a stream derived from
(seed, tag, route, ...) via ``numpy.random.SeedSequence`` spawn keys, so
route rates and outcome draws are reproducible regardless of the order in
which they are requested.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# stream tags keep rate draws and outcome draws in disjoint families
_TAG_RATES = 1
_TAG_OUTCOME = 2

CONDITION_TABLE = {
    "FarLow": ((0.2, 0.5, 0.8), 0.02),
    "FarHigh": ((0.2, 0.5, 0.8), 0.04),
    "CloseLow": ((0.4, 0.6, 0.8), 0.02),
    "CloseHigh": ((0.4, 0.6, 0.8), 0.04),
}

AIRLINE_NAMES = ("Ascend", "Summit", "DynaAir")


class InfeasibleVarianceError(ValueError):
    """Requested Beta variance is impossible for the requested mean."""


@dataclass(frozen=True)
class AirlineHyperPrior:
    alpha_star: float
    beta_star: float

    def __post_init__(self):
        if self.alpha_star <= 0 or self.beta_star <= 0:
            raise ValueError("Beta shape parameters must be positive")

    @property
    def mean(self) -> float:
        return self.alpha_star / (self.alpha_star + self.beta_star)

    @property
    def variance(self) -> float:
        s = self.alpha_star + self.beta_star
        return self.alpha_star * self.beta_star / (s * s * (s + 1.0))


@dataclass(frozen=True)
class EnvironmentSpec:
    num_airlines: int
    num_routes: int
    flights_per_route: int
    hyper_priors: tuple[AirlineHyperPrior, ...]
    rng_seed: int
    condition_label: str | None = None

    def __post_init__(self):
        if self.num_airlines < 2:
            raise ValueError("need at least two airlines")
        if self.num_routes < 1 or self.flights_per_route < 1:
            raise ValueError("need at least one route and one flight")
        if len(self.hyper_priors) != self.num_airlines:
            raise ValueError("one hyper-prior per airline required")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("seed must fit in uint64")

    def to_json(self) -> dict:
        doc = {
            "k": self.num_airlines,
            "m": self.num_routes,
            "t": self.flights_per_route,
            "seed": self.rng_seed,
            "hyper_priors": [{"alpha": h.alpha_star, "beta": h.beta_star}
                             for h in self.hyper_priors],
        }
        if self.condition_label is not None:
            doc["condition_label"] = self.condition_label
        return doc

    @staticmethod
    def from_json(doc: dict) -> "EnvironmentSpec":
        return EnvironmentSpec(
            num_airlines=doc["k"],
            num_routes=doc["m"],
            flights_per_route=doc["t"],
            hyper_priors=tuple(AirlineHyperPrior(h["alpha"], h["beta"])
                               for h in doc["hyper_priors"]),
            rng_seed=doc["seed"],
            condition_label=doc.get("condition_label"),
        )

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json(), f, indent=2)

    @staticmethod
    def load(path) -> "EnvironmentSpec":
        with open(path) as f:
            return EnvironmentSpec.from_json(json.load(f))


@dataclass(frozen=True)
class RouteRates:
    """Realized latent on-time rates for one route (1-based route index)."""

    route_index: int
    rates: tuple[float, ...]

    def __post_init__(self):
        if self.route_index < 1:
            raise ValueError("route_index is 1-based")
        if any(not 0.0 <= r <= 1.0 for r in self.rates):
            raise ValueError("rates must lie in [0, 1]")


@dataclass(frozen=True)
class ConditionSpec:
    label: str
    means: tuple[float, ...]
    variance: float

    def __post_init__(self):
        if any(not 0.0 < m < 1.0 for m in self.means):
            raise ValueError("means must lie strictly in (0, 1)")
        cap = min(m * (1.0 - m) for m in self.means)
        if not 0.0 < self.variance < cap:
            raise InfeasibleVarianceError(
                f"variance {self.variance} infeasible; needs 0 < var < {cap}")

    @staticmethod
    def named(label: str) -> "ConditionSpec":
        if label not in CONDITION_TABLE:
            raise KeyError(f"unknown condition {label!r}; "
                           f"choose from {sorted(CONDITION_TABLE)}")
        means, var = CONDITION_TABLE[label]
        return ConditionSpec(label, means, var)


def beta_params_from_moments(mu: float, sigma2: float) -> tuple[float, float]:
    """Invert (mean, variance) to Beta shape parameters (alpha, beta)."""
    if not 0.0 < mu < 1.0:
        raise ValueError("mean must lie strictly in (0, 1)")
    if sigma2 <= 0.0:
        raise ValueError("variance must be positive")
    if sigma2 >= mu * (1.0 - mu):
        raise InfeasibleVarianceError(
            f"variance {sigma2} >= mu(1-mu) = {mu * (1 - mu)}")
    s = mu * (1.0 - mu) / sigma2 - 1.0
    return mu * s, (1.0 - mu) * s


def spec_from_condition(cond: ConditionSpec, M: int, T: int, seed: int) -> EnvironmentSpec:
    """Build an environment spec from a (means, variance) condition."""
    priors = tuple(AirlineHyperPrior(*beta_params_from_moments(m, cond.variance))
                   for m in cond.means)
    return EnvironmentSpec(
        num_airlines=len(cond.means),
        num_routes=M,
        flights_per_route=T,
        hyper_priors=priors,
        rng_seed=seed,
        condition_label=cond.label,
    )


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def sample_route_rates(spec: EnvironmentSpec, m: int) -> RouteRates:
    """Draw the route's latent rates, one Beta draw per airline.

    Deterministic given (spec.rng_seed, m, airline): each draw has its own
    counter-derived stream, so results do not depend on evaluation order.
    """
    if not 1 <= m <= spec.num_routes:
        raise ValueError(f"route index {m} out of range 1..{spec.num_routes}")
    rates = tuple(
        float(_stream(spec.rng_seed, _TAG_RATES, m, k).beta(h.alpha_star, h.beta_star))
        for k, h in enumerate(spec.hyper_priors)
    )
    return RouteRates(m, rates)


def sample_outcome(theta: float, rng: np.random.Generator) -> int:
    """One Bernoulli(theta) outcome: 1 = on-time, 0 = delayed."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    return int(rng.random() < theta)


class Environment:
    """A realized environment: latent rates plus counter-based outcome streams.

    By default every Environment samples fresh route rates from its spec's
    seed; pass ``rates`` to pin a shared rate matrix across sessions.
    """

    def __init__(self, spec: EnvironmentSpec,
                 rates: Sequence[RouteRates] | None = None):
        self.spec = spec
        if rates is None:
            rates = [sample_route_rates(spec, m)
                     for m in range(1, spec.num_routes + 1)]
        rates = list(rates)
        if len(rates) != spec.num_routes:
            raise ValueError("one RouteRates per route required")
        self.route_rates: list[RouteRates] = rates

    def rates(self, m: int) -> RouteRates:
        return self.route_rates[m - 1]

    def outcome(self, m: int, t: int, k: int) -> int:
        """Outcome of choosing airline k (0-based) on flight t of route m.

        Drawn from a stream keyed by (seed, m, t, k); identical action
        sequences therefore reproduce identical outcome streams.
        """
        if not 1 <= t <= self.spec.flights_per_route:
            raise ValueError(f"flight index {t} out of range")
        theta = self.rates(m).rates[k]
        rng = _stream(self.spec.rng_seed, _TAG_OUTCOME, m, t, k)
        return sample_outcome(theta, rng)

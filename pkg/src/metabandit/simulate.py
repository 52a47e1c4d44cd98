"""Session simulation: run planners through sampled environments.

Every run derives its environment seed and its policy randomness from the
batch seed through distinct ``SeedSequence`` spawn keys, so individual runs
are reproducible independently of execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beliefs import CountState, HypothesisClass, update_counts
from .env import Environment, EnvironmentSpec, RouteRates
from .policies import Planner, PolicySpec

POINTS_PER_ON_TIME = 10
BONUS_PER_ON_TIME = 0.005

# spawn-key tags for the per-run random streams
_TAG_ENV = 10
_TAG_CHOICE = 11
_TAG_DRAWS = 12


@dataclass(frozen=True)
class FlightRecord:
    route: int     # 1-based
    flight: int    # 1-based
    airline: int   # 0-based
    outcome: int   # 1 on-time, 0 delayed


@dataclass
class SessionRecord:
    spec: EnvironmentSpec
    policy: PolicySpec
    rates: np.ndarray              # (M, K) latent on-time rates
    flights: list[FlightRecord] = field(default_factory=list)
    route_mixtures: list[np.ndarray] = field(default_factory=list)

    @property
    def on_time_total(self) -> int:
        return sum(f.outcome for f in self.flights)

    @property
    def points(self) -> int:
        return POINTS_PER_ON_TIME * self.on_time_total

    @property
    def bonus_dollars(self) -> float:
        return BONUS_PER_ON_TIME * self.on_time_total

    def choices_matrix(self) -> np.ndarray:
        """(M, T) matrix of chosen airline indices in flight order."""
        M, T = self.spec.num_routes, self.spec.flights_per_route
        out = np.full((M, T), -1, dtype=int)
        for f in self.flights:
            out[f.route - 1, f.flight - 1] = f.airline
        return out

    def outcomes_matrix(self) -> np.ndarray:
        M, T = self.spec.num_routes, self.spec.flights_per_route
        out = np.full((M, T), -1, dtype=int)
        for f in self.flights:
            out[f.route - 1, f.flight - 1] = f.outcome
        return out


def run_session(env: Environment, policy: PolicySpec, cls: HypothesisClass,
                choice_rng: np.random.Generator,
                draw_rng: np.random.Generator | None = None) -> SessionRecord:
    """Play one full session (all routes, all flights) with one planner."""
    spec = env.spec
    planner = Planner(policy, cls, spec.flights_per_route)
    record = SessionRecord(
        spec=spec, policy=policy,
        rates=np.array([env.rates(m).rates
                        for m in range(1, spec.num_routes + 1)]),
    )
    for m in range(1, spec.num_routes + 1):
        record.route_mixtures.append(planner.start_route(draw_rng).copy())
        counts = CountState.empty(spec.num_airlines)
        for t in range(1, spec.flights_per_route + 1):
            k = planner.choose(counts, choice_rng)
            y = env.outcome(m, t, k)
            record.flights.append(FlightRecord(m, t, k, y))
            counts = update_counts(counts, k, y)
        planner.finish_route(counts)
    return record


def _run_streams(base_seed: int, run: int):
    env_seed = int(np.random.SeedSequence(
        base_seed, spawn_key=(_TAG_ENV, run)).generate_state(1, np.uint64)[0])
    choice_rng = np.random.default_rng(
        np.random.SeedSequence(base_seed, spawn_key=(_TAG_CHOICE, run)))
    draw_rng = np.random.default_rng(
        np.random.SeedSequence(base_seed, spawn_key=(_TAG_DRAWS, run)))
    return env_seed, choice_rng, draw_rng


def run_batch(spec: EnvironmentSpec, policy: PolicySpec, cls: HypothesisClass,
              n_runs: int, base_seed: int,
              pinned_rates: list[RouteRates] | None = None) -> list[SessionRecord]:
    """Run ``n_runs`` independent sessions.

    By default each run samples fresh latent rates from its own environment
    seed; ``pinned_rates`` fixes one rate matrix for every run.
    """
    records = []
    for run in range(n_runs):
        env_seed, choice_rng, draw_rng = _run_streams(base_seed, run)
        env_spec = EnvironmentSpec(
            num_airlines=spec.num_airlines, num_routes=spec.num_routes,
            flights_per_route=spec.flights_per_route,
            hyper_priors=spec.hyper_priors, rng_seed=env_seed,
            condition_label=spec.condition_label)
        env = Environment(env_spec, rates=pinned_rates)
        records.append(run_session(env, policy, cls, choice_rng, draw_rng))
    return records


def first_flight_best_rate(records: list[SessionRecord], route: int) -> float:
    """Fraction of runs whose first flight on ``route`` picked the airline
    with the highest latent on-time rate for that route."""
    hits = 0
    for rec in records:
        best = int(np.argmax(rec.rates[route - 1]))
        first = next(f for f in rec.flights
                     if f.route == route and f.flight == 1)
        hits += int(first.airline == best)
    return hits / len(records)


def mean_on_time_by_route(records: list[SessionRecord]) -> np.ndarray:
    """(M,) mean on-time count per route across runs."""
    M = records[0].spec.num_routes
    T = records[0].spec.flights_per_route
    totals = np.zeros(M)
    for rec in records:
        for f in rec.flights:
            totals[f.route - 1] += f.outcome
    return totals / len(records)

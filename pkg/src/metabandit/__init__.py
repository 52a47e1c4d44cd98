"""Meta-learning Bernoulli bandit toolkit.

Hierarchical flight-choice environments, backward-induction planners with
and without cross-route transfer, a bounded-sample planner, choice-sequence
likelihoods, session simulation, and an HTTP session service.
"""

from .beliefs import (CountState, HyperPosterior, HypothesisClass,
                      PriorHypothesis, build_hypothesis_grid,
                      class_evidence_logs, hyper_posterior_update,
                      posterior_mean, route_evidence_log, update_counts)
from .combinat import (StateIndexer, compositions, compositions_count,
                       count_states, rank_composition, total_states,
                       unrank_composition)
from .dp import (EpsGreedy, Softmax, ValueTable, choice_probabilities,
                 continuation_value, solve_backward, solve_window)
from .env import (AirlineHyperPrior, ConditionSpec, Environment,
                  EnvironmentSpec, RouteRates, beta_params_from_moments,
                  sample_outcome, sample_route_rates, spec_from_condition)
from .likelihood import (ChoiceHistory, hyper_sequence, loglik_bounded_exact,
                         loglik_bounded_mc, loglik_independent,
                         loglik_transfer, route_log_probs)
from .policies import Planner, PolicySpec, uninformative_class
from .simulate import (SessionRecord, first_flight_best_rate,
                       mean_on_time_by_route, run_batch, run_session)

__version__ = "0.1.0"

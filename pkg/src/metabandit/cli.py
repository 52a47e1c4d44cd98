"""Command-line entry points: environment generation, simulation batches,
likelihood fitting over decision-rule grids, and the HTTP service."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import click
import numpy as np

from .beliefs import build_hypothesis_grid
from .data_io import history_arrays, log_from_session, read_session_log, write_session_log
from .dp import EpsGreedy, Softmax
from .env import CONDITION_TABLE, ConditionSpec, EnvironmentSpec, spec_from_condition
from .likelihood import (ChoiceHistory, loglik_bounded_exact, loglik_bounded_mc,
                         loglik_independent, loglik_transfer)
from .policies import PolicySpec
from .simulate import first_flight_best_rate, mean_on_time_by_route, run_batch

DEFAULT_MEAN_GRID = (0.2, 0.4, 0.5, 0.6, 0.8)


def parse_rule(text: str):
    """Parse 'eps:<v>' or 'softmax:<v>' into a decision rule."""
    kind, _, value = text.partition(":")
    if kind == "eps":
        return EpsGreedy(float(value))
    if kind == "softmax":
        return Softmax(float(value))
    raise click.BadParameter(f"unknown rule {text!r}; use eps:<v> or softmax:<v>")


@click.group()
def main():
    """Hierarchical flight-choice bandit toolkit."""


@main.command("gen-env")
@click.option("--condition", default="FarLow",
              help=f"one of {sorted(CONDITION_TABLE)}, or 'custom'")
@click.option("--means", default=None,
              help="comma-separated airline means (custom condition)")
@click.option("--variance", default=None, type=float,
              help="shared rate variance (custom condition)")
@click.option("--routes", "-m", default=10, show_default=True)
@click.option("--flights", "-t", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def gen_env(condition, means, variance, routes, flights, seed, out):
    """Write an environment spec JSON file."""
    if condition == "custom":
        if means is None or variance is None:
            raise click.UsageError("custom condition needs --means and --variance")
        mu = tuple(float(x) for x in means.split(","))
        cond = ConditionSpec("custom", mu, variance)
    else:
        cond = ConditionSpec.named(condition)
    spec = spec_from_condition(cond, routes, flights, seed)
    spec.save(out)
    click.echo(f"wrote {out}")


@main.command("simulate")
@click.option("--env", "env_path", required=True, type=click.Path(exists=True))
@click.option("--policy", type=click.Choice(["dp", "metadp", "brmdp"]),
              required=True)
@click.option("--d", "num_draws", default=None, type=int,
              help="hypothesis draws per route (brmdp only)")
@click.option("--rule", default="eps:0.1", show_default=True)
@click.option("--gamma", default=1.0, show_default=True)
@click.option("--lookahead", default=None, type=int)
@click.option("--runs", "-r", default=2000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--mean-grid", default=",".join(map(str, DEFAULT_MEAN_GRID)),
              show_default=True)
@click.option("--out", required=True, type=click.Path(),
              help="per-route metrics CSV; trajectories go to <out>.flights.csv")
def simulate_cmd(env_path, policy, num_draws, rule, gamma, lookahead, runs,
                 seed, mean_grid, out):
    """Run simulated sessions and write metric and trajectory CSVs."""
    spec = EnvironmentSpec.load(env_path)
    pol = PolicySpec(kind=policy, rule=parse_rule(rule), gamma=gamma,
                     lookahead=lookahead, num_draws=num_draws)
    grid = tuple(float(x) for x in mean_grid.split(","))
    cls = build_hypothesis_grid(grid, spec.num_airlines)
    records = run_batch(spec, pol, cls, runs, seed)

    mean_on_time = mean_on_time_by_route(records)
    with open(out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["route", "mean_on_time", "first_flight_best_rate"])
        for m in range(1, spec.num_routes + 1):
            w.writerow([m, f"{mean_on_time[m - 1]:.6f}",
                        f"{first_flight_best_rate(records, m):.6f}"])
    flights_path = Path(out).with_suffix(".flights.csv")
    with open(flights_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["run", "route", "flight", "airline", "outcome"])
        for i, rec in enumerate(records):
            for fl in rec.flights:
                w.writerow([i, fl.route, fl.flight, fl.airline, fl.outcome])
    click.echo(f"wrote {out} and {flights_path}")


@main.command("save-histories")
@click.option("--env", "env_path", required=True, type=click.Path(exists=True))
@click.option("--policy", type=click.Choice(["dp", "metadp", "brmdp"]),
              required=True)
@click.option("--d", "num_draws", default=None, type=int)
@click.option("--rule", default="eps:0.1", show_default=True)
@click.option("--runs", "-r", default=50, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--mean-grid", default=",".join(map(str, DEFAULT_MEAN_GRID)),
              show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
def save_histories(env_path, policy, num_draws, rule, runs, seed, mean_grid,
                   out_dir):
    """Simulate sessions and save each as a JSON-lines history log."""
    spec = EnvironmentSpec.load(env_path)
    pol = PolicySpec(kind=policy, rule=parse_rule(rule), num_draws=num_draws)
    grid = tuple(float(x) for x in mean_grid.split(","))
    cls = build_hypothesis_grid(grid, spec.num_airlines)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, rec in enumerate(run_batch(spec, pol, cls, runs, seed)):
        write_session_log(out / f"session_{i:04d}.jsonl", log_from_session(rec))
    click.echo(f"wrote {runs} histories to {out}")


def parse_grid(text: str):
    """Parse 'eps:<lo>:<hi>:<n>' or 'softmax:<lo>:<hi>:<n>' into rules."""
    parts = text.split(":")
    if len(parts) != 4 or parts[0] not in ("eps", "softmax"):
        raise click.BadParameter("grid must be eps:<lo>:<hi>:<n> or "
                                 "softmax:<lo>:<hi>:<n>")
    lo, hi, n = float(parts[1]), float(parts[2]), int(parts[3])
    values = np.linspace(lo, hi, n)
    rule_cls = EpsGreedy if parts[0] == "eps" else Softmax
    return [rule_cls(float(v)) for v in values]


@main.command("fit")
@click.option("--histories", required=True, type=click.Path(exists=True),
              help="directory of session JSONL logs")
@click.option("--policies", default="dp,metadp,brmdp", show_default=True)
@click.option("--d", "num_draws", default=1, show_default=True,
              help="hypothesis draws for the bounded planner")
@click.option("--grid", default="eps:0.01:0.5:20", show_default=True)
@click.option("--b", "n_mc", default=2000, show_default=True,
              help="Monte Carlo draws per route for the bounded planner")
@click.option("--gamma", default=1.0, show_default=True)
@click.option("--lookahead", default=None, type=int)
@click.option("--seed", default=0, show_default=True)
@click.option("--mean-grid", default=",".join(map(str, DEFAULT_MEAN_GRID)),
              show_default=True)
@click.option("--exact-check/--no-exact-check", default=False,
              help="also compute the exact bounded likelihood when the "
                   "draw-outcome space is small")
@click.option("--out", required=True, type=click.Path())
def fit(histories, policies, num_draws, grid, n_mc, gamma, lookahead, seed,
        mean_grid, exact_check, out):
    """Fit planners to saved histories over a decision-rule grid.

    Writes one CSV row per (policy, grid point) with the total
    log-likelihood summed over histories.
    """
    logs = [read_session_log(p) for p in sorted(Path(histories).glob("*.jsonl"))]
    if not logs:
        raise click.UsageError(f"no .jsonl histories in {histories}")
    hists = [ChoiceHistory(*history_arrays(log)) for log in logs]
    K = logs[0].spec.num_airlines
    grid_vals = tuple(float(x) for x in mean_grid.split(","))
    cls = build_hypothesis_grid(grid_vals, K)
    rules = parse_grid(grid)
    wanted = [p.strip() for p in policies.split(",")]
    rng = np.random.default_rng(seed)

    rows = []
    for rule in rules:
        param = rule.epsilon if isinstance(rule, EpsGreedy) else rule.tau
        for pol in wanted:
            if pol == "dp":
                ll = sum(loglik_independent(h, rule, gamma, lookahead, K=K)
                         for h in hists)
                se = 0.0
            elif pol == "metadp":
                ll = sum(loglik_transfer(cls, h, rule, gamma, lookahead)
                         for h in hists)
                se = 0.0
            elif pol == "brmdp":
                parts = [loglik_bounded_mc(cls, num_draws, h, rule, n_mc, rng,
                                           gamma, lookahead, use_cache=True)
                         for h in hists]
                ll = sum(p[0] for p in parts)
                se = float(np.sqrt(sum(p[1] ** 2 for p in parts)))
                if exact_check:
                    exact = sum(loglik_bounded_exact(cls, num_draws, h, rule,
                                                     gamma, lookahead)
                                for h in hists)
                    rows.append(["brmdp_exact", param, f"{exact:.6f}", ""])
            else:
                raise click.BadParameter(f"unknown policy {pol!r}")
            rows.append([pol, param, f"{ll:.6f}", f"{se:.6f}"])
    with open(out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["policy", "rule_param", "total_loglik", "mc_se"])
        w.writerows(rows)
    click.echo(f"wrote {out}")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True,
              envvar="METABANDIT_HOST")
@click.option("--port", default=8000, show_default=True,
              envvar="METABANDIT_PORT")
@click.option("--data-dir", default=None, type=click.Path(),
              envvar="METABANDIT_DATA_DIR",
              help="directory for session JSONL logs (enables persistence)")
def serve(host, port, data_dir):
    """Run the HTTP session service."""
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(data_dir), host=host, port=port)


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Convergence of the bounded planner's values to the transfer planner's.

For increasing draw counts D, draws many hypothesis samples, averages the
resulting empty-state action values, and reports the mean absolute gap to
the full-mixture values.

Example:
    python3 scripts/run_convergence_ladder.py --draws 1,10,100,10000
"""

import argparse

import numpy as np

from metabandit.beliefs import CountState, build_hypothesis_grid
from metabandit.cli import parse_rule
from metabandit.dp import solve_backward


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--draws", default="1,10,100,10000")
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--rule", default="eps:0.1")
    ap.add_argument("--flights", type=int, default=10)
    ap.add_argument("--airlines", type=int, default=2)
    ap.add_argument("--mean-grid", default="0.3,0.7")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    grid = tuple(float(x) for x in args.mean_grid.split(","))
    cls = build_hypothesis_grid(grid, args.airlines)
    rule = parse_rule(args.rule)
    Q = np.full(cls.J, 1.0 / cls.J)
    empty = CountState.empty(cls.K)
    target = solve_backward(cls, Q, rule, 1.0,
                            args.flights).action_values(empty)
    print("transfer values:", np.round(target, 4))

    rng = np.random.default_rng(args.seed)
    for D in (int(d) for d in args.draws.split(",")):
        draws = rng.multinomial(D, Q, size=args.samples)
        uniq, counts = np.unique(draws, axis=0, return_counts=True)
        table = solve_backward(cls, uniq / D, rule, 1.0, args.flights)
        vals = np.stack([table.action_values(empty, mix=i)
                         for i in range(len(uniq))])
        mean_vals = (counts[:, None] * vals).sum(axis=0) / args.samples
        gap = float(np.mean(np.abs(mean_vals - target)))
        print(f"D={D:>6d}: mean values {np.round(mean_vals, 4)}, "
              f"mean abs gap {gap:.5f}")


if __name__ == "__main__":
    main()

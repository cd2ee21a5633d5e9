#!/usr/bin/env python3
"""Throughput comparison of the simulation kernel backends.

Runs the coordination-game preset for a fixed horizon on the compiled
(numba) and pure-Python backends, reports rounds/second, and verifies
the two produce bitwise-identical trajectories.

Usage: python benchmarks/backend_benchmark.py [--horizon N] [--repeats K]
"""

import argparse
import time
import warnings

import numpy as np

from apla_lab import Game, Params
from apla_lab.dynamics import uniform_initial_state
from apla_lab.kernel import HAS_NUMBA, pack_strategies, simulate_rounds
from apla_lab.montecarlo import replicate_rng


def run_once(game, params, horizon, backend, seed=1234):
    rng = replicate_rng(seed, 0)
    state = uniform_initial_state(game, params, rng)
    x = pack_strategies(game, [a.strategy for a in state.agents])
    rho = np.array([a.aspiration for a in state.agents])
    draws = rng.random((horizon, game.n, 3))
    start = time.perf_counter()
    path, *_ = simulate_rounds(game, params, x, rho, draws, backend=backend)
    elapsed = time.perf_counter() - start
    return path, x, rho, elapsed


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--horizon", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    game = Game(
        action_counts=(2, 2),
        utilities=np.array([[5.0, 3.0, 1.0, 4.0], [5.0, 1.0, 3.0, 4.0]]),
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        params = Params(
            epsilon=0.06, nu=0.06, lam=0.04, h=0.04, c_asp=30.0, mode="apla"
        )

    backends = ["python"]
    if HAS_NUMBA:
        backends.insert(0, "numba")
        run_once(game, params, 100, "numba")  # trigger JIT before timing
    else:
        print("numba not importable; benchmarking the python backend only")

    results = {}
    for backend in backends:
        best = float("inf")
        for _ in range(args.repeats):
            path, x, rho, elapsed = run_once(game, params, args.horizon, backend)
            best = min(best, elapsed)
        results[backend] = (path, x, rho, best)
        print(
            f"{backend:7s}: {best:8.3f}s for {args.horizon} rounds "
            f"({args.horizon / best:,.0f} rounds/s)"
        )

    if len(results) == 2:
        (pa, xa, ra, ta), (pb, xb, rb, tb) = results["numba"], results["python"]
        identical = (
            np.array_equal(pa, pb) and np.array_equal(xa, xb) and np.array_equal(ra, rb)
        )
        print(f"backends bitwise identical: {identical}")
        print(f"speedup: {tb / ta:,.0f}x")
        if not identical:
            raise SystemExit("backend outputs diverged")


if __name__ == "__main__":
    main()

"""Seeded, replicated simulation experiments with frequency statistics.

A replicate runs the dynamics for a fixed horizon from a configured
initial state, with its own counter-based random stream keyed by
``(master seed, run index)``.  Tracked statistics: cumulative profile
frequencies over the whole horizon, frequencies over a trailing window,
the final-round profile, and a downsampled cumulative-frequency time
series.  Replicates are independent; aggregation is a deterministic
reduction in run-index order, so parallel and serial execution produce
identical reports.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Params, pure_strategy_state, uniform_initial_state
from .errors import UsageError
from .games import Game, game_to_dict
from .kernel import pack_strategies, simulate_rounds
from .stability import build_digraph, stochastically_stable_set

MAX_SERIES_POINTS = 2000


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce an experiment bitwise."""

    game: Game
    params: Params
    horizon: int
    runs: int
    seed: int
    tracked_profiles: tuple[int, ...] = ()
    end_window_fraction: float = 0.1
    series_points: int = MAX_SERIES_POINTS
    initial: dict | None = None  # None -> uniform start; {"type": "pss", "profile": k}
    keep_raw: bool = False

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise UsageError(f"horizon must be at least 1, got {self.horizon}")
        if self.runs < 1:
            raise UsageError(f"runs must be at least 1, got {self.runs}")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must fit in an unsigned 64-bit integer")
        if not 0.0 < self.end_window_fraction <= 1.0:
            raise UsageError(
                f"end_window_fraction must be in (0, 1], got {self.end_window_fraction}"
            )
        if not 1 <= self.series_points <= MAX_SERIES_POINTS:
            raise UsageError(
                f"series_points must be in [1, {MAX_SERIES_POINTS}]"
            )
        tracked = tuple(int(p) for p in self.tracked_profiles)
        if not tracked:
            tracked = tuple(range(self.game.num_profiles))
        for p in tracked:
            if not 0 <= p < self.game.num_profiles:
                raise UsageError(f"tracked profile {p} out of range")
        object.__setattr__(self, "tracked_profiles", tracked)
        if self.initial is not None:
            kind = self.initial.get("type")
            if kind == "pss":
                p = int(self.initial["profile"])
                if not 0 <= p < self.game.num_profiles:
                    raise UsageError(f"initial profile {p} out of range")
            elif kind != "uniform":
                raise UsageError(
                    "initial must be null, {'type': 'uniform'}, or "
                    "{'type': 'pss', 'profile': k}"
                )
        self.params.validate_against(self.game)

    def to_dict(self) -> dict:
        return {
            "game": game_to_dict(self.game),
            "params": self.params.to_dict(),
            "horizon": self.horizon,
            "runs": self.runs,
            "seed": self.seed,
            "tracked_profiles": list(self.tracked_profiles),
            "end_window_fraction": self.end_window_fraction,
            "series_points": self.series_points,
            "initial": self.initial,
        }

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class RunStats:
    """Per-replicate statistics (frequencies over all profile ids)."""

    run_index: int
    cumulative_freq: np.ndarray
    end_window_freq: np.ndarray
    final_profile: int
    series_times: np.ndarray
    series: dict[int, np.ndarray]
    max_simplex_drift: float
    aspiration_range: tuple[float, float]
    path: np.ndarray | None = None


@dataclass(frozen=True)
class ExperimentReport:
    """Replicate statistics plus their deterministic aggregates."""

    config: ExperimentConfig
    config_hash: str
    tool_version: str
    runs: tuple[RunStats, ...]
    aggregate: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "config_hash": self.config_hash,
            "seed": self.config.seed,
            "config": self.config.to_dict(),
            "runs": [
                {
                    "run_index": r.run_index,
                    "cumulative_freq": r.cumulative_freq.tolist(),
                    "end_window_freq": r.end_window_freq.tolist(),
                    "final_profile": r.final_profile,
                    "max_simplex_drift": r.max_simplex_drift,
                    "aspiration_range": list(r.aspiration_range),
                }
                for r in self.runs
            ],
            "aggregate": self.aggregate,
        }


def replicate_rng(seed: int, run_index: int) -> np.random.Generator:
    """Counter-based stream keyed by (master seed, replicate index)."""
    key = np.array([seed, run_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _series_times(horizon: int, points: int) -> np.ndarray:
    return np.unique(np.linspace(1, horizon, min(points, horizon)).astype(np.int64))


def run_replicate(
    config: ExperimentConfig, run_index: int, backend: str | None = None
) -> RunStats:
    """Execute one replicate; deterministic given ``(seed, run_index)``."""
    if not 0 <= run_index < config.runs:
        raise UsageError(f"run_index {run_index} out of range")
    game, params = config.game, config.params
    rng = replicate_rng(config.seed, run_index)
    if config.initial is None or config.initial["type"] == "uniform":
        state0 = uniform_initial_state(game, params, rng)
    else:
        state0 = pure_strategy_state(game, int(config.initial["profile"]))
    x = pack_strategies(game, [a.strategy for a in state0.agents])
    rho = np.array([a.aspiration for a in state0.agents])
    draws = rng.random((config.horizon, game.n, 3))
    path, max_drift, rho_lo, rho_hi = simulate_rounds(
        game, params, x, rho, draws, backend=backend
    )
    counts = np.bincount(path, minlength=game.num_profiles)
    window = max(1, int(config.horizon * config.end_window_fraction))
    end_counts = np.bincount(path[-window:], minlength=game.num_profiles)
    times = _series_times(config.horizon, config.series_points)
    series = {}
    for p in config.tracked_profiles:
        hits = np.cumsum(path == p)
        series[p] = hits[times - 1] / times
    return RunStats(
        run_index=run_index,
        cumulative_freq=counts / config.horizon,
        end_window_freq=end_counts / window,
        final_profile=int(path[-1]),
        series_times=times,
        series=series,
        max_simplex_drift=max_drift,
        aspiration_range=(rho_lo, rho_hi),
        path=path if config.keep_raw else None,
    )


def resolve_threads(runs: int) -> int:
    """Worker count: min(runs, cpu count), capped by APLA_LAB_THREADS."""
    cap = os.environ.get("APLA_LAB_THREADS", "")
    workers = min(runs, os.cpu_count() or 1)
    if cap:
        try:
            cap_value = int(cap)
        except ValueError as exc:
            raise UsageError(f"APLA_LAB_THREADS must be an integer, got {cap!r}") from exc
        if cap_value < 1:
            raise UsageError("APLA_LAB_THREADS must be at least 1")
        workers = min(workers, cap_value)
    return max(workers, 1)


def _mean_std(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = rows.mean(axis=0)
    if rows.shape[0] < 2:
        return mean, np.zeros_like(mean)
    return mean, rows.std(axis=0, ddof=1)


def run_experiment(
    config: ExperimentConfig,
    threads: int | None = None,
    backend: str | None = None,
    tool_version: str = "0",
) -> ExperimentReport:
    """Run all replicates (in parallel when allowed) and aggregate."""
    workers = threads if threads is not None else resolve_threads(config.runs)
    indices = range(config.runs)
    if workers > 1 and config.runs > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(lambda i: run_replicate(config, i, backend), indices))
    else:
        stats = [run_replicate(config, i, backend) for i in indices]

    cumulative = np.stack([r.cumulative_freq for r in stats])
    end_window = np.stack([r.end_window_freq for r in stats])
    final_onehot = np.zeros((config.runs, config.game.num_profiles))
    for r in stats:
        final_onehot[r.run_index, r.final_profile] = 1.0
    cum_mean, cum_std = _mean_std(cumulative)
    end_mean, end_std = _mean_std(end_window)
    fin_mean, fin_std = _mean_std(final_onehot)
    series_stats = {}
    for p in config.tracked_profiles:
        rows = np.stack([r.series[p] for r in stats])
        mean, std = _mean_std(rows)
        series_stats[p] = {
            "times": stats[0].series_times.tolist(),
            "mean": mean.tolist(),
            "std": std.tolist(),
        }
    aggregate = {
        "cumulative_freq": {"mean": cum_mean.tolist(), "std": cum_std.tolist()},
        "end_window_freq": {"mean": end_mean.tolist(), "std": end_std.tolist()},
        "final_profile_freq": {"mean": fin_mean.tolist(), "std": fin_std.tolist()},
        "series": {str(p): doc for p, doc in series_stats.items()},
    }
    return ExperimentReport(
        config=config,
        config_hash=config.digest(),
        tool_version=tool_version,
        runs=tuple(stats),
        aggregate=aggregate,
    )


def write_series_csv(report: ExperimentReport, path: str) -> None:
    """Tidy time series: one row per (run, time, tracked profile)."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("run,t,profile,cumulative_freq\n")
        for stats in report.runs:
            for p in report.config.tracked_profiles:
                for t, freq in zip(stats.series_times, stats.series[p]):
                    handle.write(f"{stats.run_index},{t},{p},{float(freq)!r}\n")


def compare_prediction(
    game: Game,
    params: Params,
    report: ExperimentReport,
    delta: float = 0.1,
    rel_tol: float = 1e-9,
) -> dict:
    """Check the empirically dominant end-window profile against the
    predicted stochastically stable set."""
    if report.config.game is not game and game_to_dict(report.config.game) != game_to_dict(game):
        raise UsageError("report was produced for a different game")
    digraph = build_digraph(game, params, delta=delta)
    predicted = stochastically_stable_set(digraph, rel_tol=rel_tol)
    end_mean = np.asarray(report.aggregate["end_window_freq"]["mean"])
    observed = int(np.argmax(end_mean))
    others = np.delete(end_mean, observed)
    margin = float(end_mean[observed] - (others.max() if others.size else 0.0))
    match = observed in predicted
    explanation = None
    if params.lam == 0.0:
        explanation = (
            "lambda = 0: the chain is not ergodic, so the stability "
            "prediction does not apply to this run"
        )
    elif not match:
        explanation = "observed end-window mode is outside the predicted set"
    return {
        "predicted_stable_set": sorted(predicted),
        "observed_mode": observed,
        "observed_end_window_freq": float(end_mean[observed]),
        "margin": margin,
        "match": match,
        "explanation": explanation,
    }

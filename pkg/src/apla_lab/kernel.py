"""Long-horizon simulation loop, compiled with numba when available.

The per-round update dominates runtime for the horizons the experiment
protocol needs (10^5 .. 10^6 rounds), so the loop is JIT-compiled.  The
uncompiled function object is kept as a pure-Python/numpy fallback and as
a cross-check: both backends consume the same pre-drawn uniform buffer
with the same scalar expressions, so their outputs are bitwise identical.

Select the backend with the environment variable ``APLA_LAB_BACKEND``
(``numba`` or ``python``; default ``numba`` when importable) or per call
via the ``backend`` argument.  ``benchmarks/backend_benchmark.py``
compares the two.

Uniform-draw layout per round ``t`` and player ``i``:
``draws[t, i, 0]`` tremble coin, ``draws[t, i, 1]`` action pick,
``draws[t, i, 2]`` payoff noise.
"""

from __future__ import annotations

import os
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import UsageError

if TYPE_CHECKING:  # pragma: no cover
    from .dynamics import Params
    from .games import Game

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False


def _simulate_loop(
    utilities,
    action_counts,
    strides,
    x,
    rho,
    draws,
    epsilon,
    nu,
    lam,
    h,
    c_asp,
    upsilon_bar,
    path,
):
    """Run ``draws.shape[0]`` rounds in place; returns simplex/aspiration
    diagnostics.  Parameter validity (``epsilon * phi <= 1``) is enforced
    by the caller, not per round."""
    num_rounds = draws.shape[0]
    n = action_counts.shape[0]
    step_asp = epsilon * nu
    actions = np.empty(n, dtype=np.int64)
    max_drift = 0.0
    rho_lo = rho[0]
    rho_hi = rho[0]
    for i in range(n):
        if rho[i] < rho_lo:
            rho_lo = rho[i]
        if rho[i] > rho_hi:
            rho_hi = rho[i]
    for t in range(num_rounds):
        profile = 0
        for i in range(n):
            k = action_counts[i]
            coin = draws[t, i, 0]
            pick = draws[t, i, 1]
            if coin < lam:
                a = int(pick * k)
                if a >= k:
                    a = k - 1
            else:
                a = k - 1
                acc = 0.0
                for j in range(k):
                    acc += x[i, j]
                    if pick < acc:
                        a = j
                        break
            actions[i] = a
            profile += a * strides[i]
        path[t] = profile
        for i in range(n):
            k = action_counts[i]
            chosen = actions[i]
            measured = utilities[i, profile] + (2.0 * draws[t, i, 2] - 1.0) * upsilon_bar
            surplus = measured - rho[i]
            if surplus >= 0.0:
                phi = measured
            else:
                shrunk = measured + c_asp * surplus
                phi = h if shrunk < h else shrunk
            step = epsilon * phi
            total = 0.0
            for j in range(k):
                target = 1.0 if j == chosen else 0.0
                value = x[i, j] + step * (target - x[i, j])
                x[i, j] = value
                total += value
            drift = total - 1.0
            if drift < 0.0:
                drift = -drift
            if drift > max_drift:
                max_drift = drift
            for j in range(k):
                x[i, j] = x[i, j] / total
            rho[i] = rho[i] + step_asp * (measured - rho[i])
            if rho[i] < rho_lo:
                rho_lo = rho[i]
            if rho[i] > rho_hi:
                rho_hi = rho[i]
    return max_drift, rho_lo, rho_hi


if HAS_NUMBA:
    _simulate_loop_numba = njit(cache=True, nogil=True)(_simulate_loop)


def resolve_backend(backend: str | None = None) -> str:
    """Pick the kernel backend from the argument or ``APLA_LAB_BACKEND``."""
    name = backend or os.environ.get("APLA_LAB_BACKEND", "") or "auto"
    if name == "auto":
        return "numba" if HAS_NUMBA else "python"
    if name == "python":
        return "python"
    if name == "numba":
        if not HAS_NUMBA:
            raise UsageError("APLA_LAB_BACKEND=numba but numba is not importable")
        return "numba"
    raise UsageError(f"unknown backend {name!r}; use 'numba' or 'python'")


def pack_strategies(game: "Game", strategies: Sequence[np.ndarray]) -> np.ndarray:
    """Copy per-player strategy vectors into one zero-padded (n, max_k) array."""
    if len(strategies) != game.n:
        raise UsageError(f"expected {game.n} strategy vectors")
    out = np.zeros((game.n, max(game.action_counts)))
    for i, vec in enumerate(strategies):
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (game.action_counts[i],):
            raise UsageError(
                f"player {i} strategy has shape {vec.shape}, "
                f"expected ({game.action_counts[i]},)"
            )
        out[i, : vec.shape[0]] = vec
    return out


def simulate_rounds(
    game: "Game",
    params: "Params",
    x: np.ndarray,
    rho: np.ndarray,
    draws: np.ndarray,
    backend: str | None = None,
) -> tuple[np.ndarray, float, float, float]:
    """Advance ``x`` and ``rho`` in place through one round per draw block.

    Returns ``(path, max_drift, rho_lo, rho_hi)`` where ``path[t]`` is the
    joint profile id played in round ``t``, ``max_drift`` the largest
    pre-renormalization deviation of a strategy sum from 1, and
    ``rho_lo/rho_hi`` the range visited by any aspiration level.
    """
    draws = np.ascontiguousarray(draws, dtype=np.float64)
    if draws.ndim != 3 or draws.shape[1] != game.n or draws.shape[2] != 3:
        raise UsageError(f"draws must have shape (T, {game.n}, 3), got {draws.shape}")
    if x.shape != (game.n, max(game.action_counts)):
        raise UsageError("x must be a packed (n, max_k) strategy array")
    impl = _simulate_loop_numba if resolve_backend(backend) == "numba" else _simulate_loop
    path = np.empty(draws.shape[0], dtype=np.int64)
    max_drift, rho_lo, rho_hi = impl(
        game.utilities,
        np.asarray(game.action_counts, dtype=np.int64),
        np.asarray(game.strides, dtype=np.int64),
        x,
        rho,
        draws,
        float(params.epsilon),
        float(params.nu),
        float(params.lam),
        float(params.h),
        float(params.c_asp),
        float(params.upsilon_bar),
        path,
    )
    return path, float(max_drift), float(rho_lo), float(rho_hi)

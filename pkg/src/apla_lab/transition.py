"""Closed-form one-step transition quantities.

After a single tremble moves one player onto a new action, the chance
that the joint state locks onto the new profile is governed by the
geometric pull of the strategy update.  This module evaluates the exact
finite-step product form of that probability, its small-step asymptotic
``exp(-eta(delta) / (epsilon * u))``, the nominal and noise-perturbed
hitting times of the destination neighborhood, and packages a full
per-edge analysis (satisfaction class, probability, resistance, and the
step-size-free resistance coefficient used for stability ranking).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dynamics import PLA, Params
from .errors import ParameterError, UsageError
from .games import Game, mover_between, utility_at

PI2_OVER_6 = math.pi * math.pi / 6.0

ASYMPTOTIC = "asymptotic"
PRODUCT = "product"
RESISTANCE_MODES = (ASYMPTOTIC, PRODUCT)


def eta(delta: float, tol: float = 1e-12) -> float:
    """The series ``sum_{l>=1} (1 - delta^l) / l^2 = pi^2/6 - Li2(delta)``.

    Evaluated through the dilogarithm: the direct series needs ~1/tol
    terms near ``delta = 0``, while ``Li2(delta) = sum delta^l / l^2``
    is truncated once ``delta^L / L^2 < tol``, giving absolute error at
    most ``tol / (1 - delta)``.
    """
    if not 0.0 <= delta <= 1.0:
        raise UsageError(f"delta must be in [0, 1], got {delta}")
    if tol <= 0.0:
        raise UsageError(f"tol must be positive, got {tol}")
    if delta == 1.0:
        return 0.0
    if delta == 0.0:
        return PI2_OVER_6
    li2 = 0.0
    power = delta
    ell = 1
    while True:
        term = power / (ell * ell)
        li2 += term
        if term < tol:
            break
        power *= delta
        ell += 1
    return PI2_OVER_6 - li2


def _first_step_at_or_below(delta: float, base: float) -> int:
    """Smallest integer ``k >= 0`` with ``base**k <= delta`` for base in (0,1)."""
    if delta >= 1.0:
        return 0
    k = math.ceil(math.log(delta) / math.log(base))
    while k > 0 and base ** (k - 1) <= delta:
        k -= 1
    while base**k > delta:
        k += 1
    return k


def nominal_hitting_time(delta: float, epsilon: float, u: float) -> int:
    """Rounds of uninterrupted play needed to push the complementary
    strategy mass ``(1 - epsilon * u)^t`` down to ``delta``.

    Equals ``ceil(log(delta) / log(1 - epsilon * u))``.
    """
    if not 0.0 < delta <= 1.0:
        raise ParameterError(f"delta must be in (0, 1], got {delta}")
    eu = epsilon * u
    if not 0.0 < eu < 1.0:
        raise ParameterError(f"epsilon * u must be in (0, 1), got {eu}")
    return _first_step_at_or_below(delta, 1.0 - eu)


def satisfactory_prob_product(delta: float, epsilon: float, u: float) -> float:
    """Finite-step transition probability ``prod_{k=1..tau} (1 - H^k)``
    with ``H = 1 - epsilon * u`` and ``tau`` the nominal hitting time.

    Accumulated in log space; value in (0, 1].
    """
    tau = nominal_hitting_time(delta, epsilon, u)
    base = 1.0 - epsilon * u
    log_sum = 0.0
    power = 1.0
    for _ in range(tau):
        power *= base
        log_sum += math.log1p(-power)
    return math.exp(log_sum)


def satisfactory_prob_asymptotic(delta: float, epsilon: float, u: float) -> float:
    """Small-step limit ``exp(-eta(delta) / (epsilon * u))`` of the
    satisfactory transition probability."""
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must be in (0, 1), got {delta}")
    if epsilon <= 0.0 or u <= 0.0:
        raise ParameterError("epsilon and u must be positive")
    return math.exp(-eta(delta) / (epsilon * u))


def unsatisfactory_prob_asymptotic(delta: float, epsilon: float, h: float) -> float:
    """Small-step limit ``exp(-eta(delta) / (epsilon * h))`` of the
    unsatisfactory transition probability (aspiration factor pinned at
    its floor ``h``).  Requires ``h > 0``; with ``h = 0`` every edge uses
    the satisfactory form instead (plain-automata behavior)."""
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must be in (0, 1), got {delta}")
    if epsilon <= 0.0:
        raise ParameterError("epsilon must be positive")
    if h <= 0.0:
        raise ParameterError("h must be positive for unsatisfactory transitions")
    return math.exp(-eta(delta) / (epsilon * h))


def noisy_hitting_bounds(
    delta: float,
    epsilon: float,
    u: float,
    upsilon_bar: float,
    c_asp: float,
) -> tuple[int, int]:
    """Essential bounds on the hitting time under payoff noise.

    The fastest admissible pull shrinks the complementary mass with base
    ``1 - epsilon * (u + upsilon_bar)``; the slowest with base
    ``1 - epsilon * (u - kappa)`` where ``kappa = (1 + 2 c_asp) *
    upsilon_bar``.  Both bounds are first-crossing indices, so they
    bracket :func:`nominal_hitting_time` and collapse onto it at
    ``upsilon_bar = 0``.
    """
    if not 0.0 <= upsilon_bar < delta:
        raise ParameterError(
            f"need delta > upsilon_bar >= 0, got delta={delta}, "
            f"upsilon_bar={upsilon_bar}"
        )
    if delta > 1.0:
        raise ParameterError(f"delta must be at most 1, got {delta}")
    if c_asp < 0.0:
        raise ParameterError(f"c_asp must be nonnegative, got {c_asp}")
    kappa = (1.0 + 2.0 * c_asp) * upsilon_bar
    if u - kappa <= 0.0:
        raise ParameterError(
            f"need u > (1 + 2 c_asp) * upsilon_bar, got u={u}, kappa={kappa:g}"
        )
    fast = epsilon * (u + upsilon_bar)
    slow = epsilon * (u - kappa)
    if not 0.0 < fast < 1.0:
        raise ParameterError(f"epsilon * (u + upsilon_bar) must be in (0, 1), got {fast}")
    min_steps = _first_step_at_or_below(delta, 1.0 - fast)
    max_steps = _first_step_at_or_below(delta, 1.0 - slow)
    return min_steps, max_steps


@dataclass(frozen=True)
class EdgeAnalysis:
    """Annotation of one directed one-step transition between profiles."""

    source: int
    dest: int
    mover: int
    satisfactory: bool
    probability: float
    resistance: float
    coefficient: float
    gamma: float

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "dest": self.dest,
            "mover": self.mover,
            "satisfactory": self.satisfactory,
            "probability": self.probability,
            "resistance": self.resistance,
            "coefficient": self.coefficient,
            "gamma": self.gamma,
        }


def analyze_edge(
    game: Game,
    params: Params,
    source: int,
    dest: int,
    delta: float = 0.1,
    resistance_mode: str = ASYMPTOTIC,
) -> EdgeAnalysis:
    """Classify and weight the one-step transition ``source -> dest``.

    The mover's payoff comparison picks the branch: satisfactory
    (weak improvement; destination payoff sets the scale) or
    unsatisfactory (aspiration floor ``h`` sets the scale).  In ``pla``
    mode every edge uses the satisfactory form with the destination
    payoff.  ``coefficient`` is the step-size-free resistance scale
    (``1/u`` or ``1/h``); ``probability`` and ``resistance`` are the
    finite ``(delta, epsilon)`` diagnostics in the requested mode.
    """
    if resistance_mode not in RESISTANCE_MODES:
        raise UsageError(
            f"resistance_mode must be one of {RESISTANCE_MODES}, got {resistance_mode!r}"
        )
    mover = mover_between(game, source, dest)
    u_from = utility_at(game, mover, source)
    u_to = utility_at(game, mover, dest)
    satisfactory = u_to >= u_from
    if params.mode == PLA or satisfactory:
        if u_to <= 0.0:
            raise ParameterError(
                "one-step analysis needs strictly positive payoffs; "
                f"player {mover} has payoff {u_to:g} at profile {dest}"
            )
        coefficient = 1.0 / u_to
        if resistance_mode == PRODUCT:
            probability = satisfactory_prob_product(delta, params.epsilon, u_to)
        else:
            probability = satisfactory_prob_asymptotic(delta, params.epsilon, u_to)
    else:
        coefficient = 1.0 / params.h
        probability = unsatisfactory_prob_asymptotic(delta, params.epsilon, params.h)
    resistance = -math.log(probability) if probability > 0.0 else math.inf
    gamma = 1.0 / (game.n * game.action_counts[mover])
    return EdgeAnalysis(
        source=source,
        dest=dest,
        mover=mover,
        satisfactory=satisfactory,
        probability=probability,
        resistance=resistance,
        coefficient=coefficient,
        gamma=gamma,
    )

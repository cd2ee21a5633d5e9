"""One synchronous round of the learning dynamics.

Each round every player samples an action from its mixed strategy (with a
small tremble probability of drawing uniformly), observes a noisy payoff
at the resulting joint profile, rescales the reinforcement through the
aspiration factor, moves its strategy toward the chosen vertex, and
nudges its aspiration level toward the observed payoff at the slower
rate ``epsilon * nu``.

Plain perturbed learning automata (mode ``"pla"``) are the special case
``h = c_asp = 0`` in which the aspiration factor reduces to the measured
payoff itself.

The scalar operations here are the reference semantics; the long-horizon
loop lives in :mod:`apla_lab.kernel` and uses the exact same
floating-point expressions, so one round through either path is bitwise
identical.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, UsageError
from .games import Game, decode_profile, encode_profile, utility_at
from .kernel import pack_strategies, simulate_rounds

PLA = "pla"
APLA = "apla"


@dataclass(frozen=True)
class Params:
    """Learning and analysis constants for one run.

    ``nu`` is an independent rate: the aspiration step size is
    ``epsilon * nu``.  ``c_asp`` is the slope applied to a negative
    surplus inside the aspiration factor and ``h`` its floor.  Mode
    ``"pla"`` forces ``h = c_asp = 0``.
    """

    epsilon: float
    nu: float
    lam: float = 0.0
    h: float = 0.0
    c_asp: float = 0.0
    upsilon_bar: float = 0.0
    mode: str = APLA

    def __post_init__(self) -> None:
        if self.mode not in (PLA, APLA):
            raise ParameterError(f"mode must be '{PLA}' or '{APLA}', got {self.mode!r}")
        if not 0.0 < self.epsilon < 1.0:
            raise ParameterError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.nu <= 0.0:
            raise ParameterError(f"nu must be positive, got {self.nu}")
        if not 0.0 <= self.lam <= 1.0:
            raise ParameterError(f"lambda must be in [0, 1], got {self.lam}")
        if self.h < 0.0 or self.c_asp < 0.0 or self.upsilon_bar < 0.0:
            raise ParameterError("h, c_asp and upsilon_bar must be nonnegative")
        if self.mode == PLA and (self.h != 0.0 or self.c_asp != 0.0):
            warnings.warn("pla mode forces h = c_asp = 0", stacklevel=2)
            object.__setattr__(self, "h", 0.0)
            object.__setattr__(self, "c_asp", 0.0)
        if self.epsilon * self.nu > 1.0:
            raise ParameterError("aspiration step epsilon * nu must not exceed 1")
        if self.nu >= 1.0:
            warnings.warn(
                "nu >= 1: the aspiration level no longer updates at a slower "
                "time-scale than the strategy",
                stacklevel=2,
            )
        if self.lam == 0.0:
            warnings.warn(
                "lambda = 0: the chain is not ergodic and stability "
                "predictions do not apply",
                stacklevel=2,
            )

    def validate_against(self, game: Game) -> None:
        """Check the step-size and aspiration bounds against a payoff table."""
        if self.epsilon * (game.u_max + self.upsilon_bar) >= 1.0:
            raise ParameterError(
                f"epsilon * (u_max + upsilon_bar) = "
                f"{self.epsilon * (game.u_max + self.upsilon_bar):g} must be < 1"
            )
        if self.upsilon_bar >= game.u_min:
            raise ParameterError(
                f"upsilon_bar = {self.upsilon_bar:g} must be smaller than the "
                f"minimum payoff {game.u_min:g} so measured payoffs stay positive"
            )
        if self.mode == APLA:
            if self.h <= 0.0:
                raise ParameterError("apla mode requires h > 0")
            if self.h >= game.u_min:
                raise ParameterError(
                    f"h = {self.h:g} must be smaller than the minimum payoff "
                    f"{game.u_min:g}"
                )

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "nu": self.nu,
            "lambda": self.lam,
            "h": self.h,
            "c_asp": self.c_asp,
            "upsilon_bar": self.upsilon_bar,
            "mode": self.mode,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Params":
        known = {"epsilon", "nu", "lambda", "h", "c_asp", "upsilon_bar", "mode"}
        extra = set(doc) - known
        if extra:
            raise ParameterError(f"unknown params fields: {sorted(extra)}")
        try:
            return cls(
                epsilon=float(doc["epsilon"]),
                nu=float(doc["nu"]),
                lam=float(doc.get("lambda", 0.0)),
                h=float(doc.get("h", 0.0)),
                c_asp=float(doc.get("c_asp", 0.0)),
                upsilon_bar=float(doc.get("upsilon_bar", 0.0)),
                mode=str(doc.get("mode", APLA)),
            )
        except KeyError as exc:
            raise ParameterError(f"params missing required field {exc}") from exc


def slow_aspiration_preset(epsilon: float, **kwargs) -> Params:
    """Params with the ``nu = epsilon`` schedule (aspiration step epsilon^2)."""
    return Params(epsilon=epsilon, nu=epsilon, **kwargs)


@dataclass(frozen=True)
class AgentState:
    """One player's mixed strategy and aspiration level."""

    strategy: np.ndarray
    aspiration: float

    def __post_init__(self) -> None:
        vec = np.ascontiguousarray(self.strategy, dtype=np.float64)
        if vec.ndim != 1 or vec.size < 1:
            raise UsageError("strategy must be a nonempty vector")
        if vec.min() < 0.0 or abs(vec.sum() - 1.0) > 1e-9:
            raise UsageError("strategy must lie on the probability simplex")
        vec.flags.writeable = False
        object.__setattr__(self, "strategy", vec)
        object.__setattr__(self, "aspiration", float(self.aspiration))


@dataclass(frozen=True)
class SystemState:
    """Joint state of all players after ``time`` rounds."""

    agents: tuple[AgentState, ...]
    last_profile: int
    time: int = 0


def sample_action(strategy: np.ndarray, lam: float, rng: np.random.Generator) -> int:
    """Draw an action: from ``strategy`` w.p. ``1 - lam``, else uniformly.

    The tremble draws over all actions, so it may return the action the
    strategy would have picked anyway.  Consumes two uniforms.
    """
    vec = np.asarray(strategy, dtype=np.float64)
    if vec.ndim != 1 or abs(vec.sum() - 1.0) > 1e-9 or vec.min() < 0.0:
        raise UsageError("strategy must be a normalized probability vector")
    if not 0.0 <= lam <= 1.0:
        raise UsageError(f"lambda must be in [0, 1], got {lam}")
    coin = rng.random()
    pick = rng.random()
    return _pick_action(vec, vec.shape[0], lam, coin, pick)


def _pick_action(vec, k: int, lam: float, coin: float, pick: float) -> int:
    # Same branch structure as the simulation kernel.
    if coin < lam:
        a = int(pick * k)
        return a if a < k else k - 1
    acc = 0.0
    for j in range(k):
        acc += vec[j]
        if pick < acc:
            return j
    return k - 1


def measure_utility(
    game: Game,
    player: int,
    profile: int,
    upsilon_bar: float,
    rng: np.random.Generator,
) -> float:
    """Stored payoff plus uniform noise on ``[-upsilon_bar, upsilon_bar]``.

    Always consumes one uniform; with ``upsilon_bar = 0`` the result is
    exactly the stored payoff.
    """
    if upsilon_bar < 0.0:
        raise UsageError("upsilon_bar must be nonnegative")
    nominal = utility_at(game, player, profile)
    return nominal + (2.0 * rng.random() - 1.0) * upsilon_bar


def aspiration_factor(measured: float, surplus: float, h: float, c_asp: float) -> float:
    """Reinforcement multiplier: the measured payoff when satisfied,
    otherwise the penalized payoff floored at ``h``."""
    if surplus >= 0.0:
        return measured
    shrunk = measured + c_asp * surplus
    return h if shrunk < h else shrunk


def strategy_update(
    x: np.ndarray, chosen: int, phi: float, epsilon: float
) -> np.ndarray:
    """Move ``x`` toward the vertex of ``chosen`` by a step ``epsilon * phi``.

    The exact update preserves the coordinate sum; the result is
    renormalized to squash accumulated rounding.  The chosen coordinate
    never decreases before renormalization.
    """
    vec = np.asarray(x, dtype=np.float64)
    k = vec.shape[0]
    if not 0 <= chosen < k:
        raise UsageError(f"chosen action {chosen} out of range")
    step = epsilon * phi
    if not 0.0 <= step <= 1.0:
        raise ParameterError(
            f"epsilon * phi = {step:g} outside [0, 1]; the update would leave "
            "the simplex"
        )
    out = np.empty(k)
    total = 0.0
    for j in range(k):
        target = 1.0 if j == chosen else 0.0
        value = vec[j] + step * (target - vec[j])
        out[j] = value
        total += value
    for j in range(k):
        out[j] = out[j] / total
    return out


def aspiration_update(rho: float, measured: float, epsilon: float, nu: float) -> float:
    """Convex step of size ``epsilon * nu`` from ``rho`` toward ``measured``."""
    step = epsilon * nu
    if not 0.0 <= step <= 1.0:
        raise ParameterError(f"epsilon * nu = {step:g} outside [0, 1]")
    return rho + step * (measured - rho)


def uniform_initial_state(
    game: Game, params: Params, rng: np.random.Generator
) -> SystemState:
    """Default start: uniform strategies, aspirations measured once (noisily)
    at a profile sampled from those strategies.  Consumes one ``(n, 3)``
    block of uniforms."""
    draws = rng.random((game.n, 3))
    actions = []
    agents = []
    for i, k in enumerate(game.action_counts):
        vec = np.full(k, 1.0 / k)
        actions.append(_pick_action(vec, k, 0.0, draws[i, 0], draws[i, 1]))
    profile = encode_profile(game, actions)
    for i in range(game.n):
        noise = (2.0 * draws[i, 2] - 1.0) * params.upsilon_bar
        rho = utility_at(game, i, profile) + noise
        agents.append(
            AgentState(
                strategy=np.full(game.action_counts[i], 1.0 / game.action_counts[i]),
                aspiration=rho,
            )
        )
    return SystemState(agents=tuple(agents), last_profile=profile, time=0)


def pure_strategy_state(game: Game, profile: int) -> SystemState:
    """The state with degenerate strategies at ``profile`` and aspirations
    equal to the exact payoffs there."""
    actions = decode_profile(game, profile)
    agents = []
    for i, k in enumerate(game.action_counts):
        vec = np.zeros(k)
        vec[actions[i]] = 1.0
        agents.append(AgentState(strategy=vec, aspiration=utility_at(game, i, profile)))
    return SystemState(agents=tuple(agents), last_profile=profile, time=0)


def step_round(
    game: Game, state: SystemState, params: Params, rng: np.random.Generator
) -> SystemState:
    """One synchronous round; a pure transition of ``(state, randomness)``.

    All players sample from their pre-round strategies, then update from
    their own noisy measurement at the new joint profile.  Consumes one
    ``(1, n, 3)`` block of uniforms.
    """
    params.validate_against(game)
    if len(state.agents) != game.n:
        raise UsageError("state has the wrong number of agents")
    draws = rng.random((1, game.n, 3))
    x = pack_strategies(game, [a.strategy for a in state.agents])
    rho = np.array([a.aspiration for a in state.agents], dtype=np.float64)
    path, _, _, _ = simulate_rounds(game, params, x, rho, draws)
    agents = tuple(
        AgentState(
            strategy=x[i, : game.action_counts[i]].copy(),
            aspiration=float(rho[i]),
        )
        for i in range(game.n)
    )
    return SystemState(agents=agents, last_profile=int(path[0]), time=state.time + 1)

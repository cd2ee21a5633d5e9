"""Finite strategic-form games and their combinatorial predicates.

A game holds one flat payoff table per player, indexed by the profile id:
the mixed-radix encoding of the joint action with player 0 as the least
significant digit.  All values are immutable after construction, so a
`Game` can be shared freely across threads.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import GameStructureError, UsageError


@dataclass(frozen=True)
class Game:
    """An n-player game with per-player flat utility tables.

    ``utilities[i][p]`` is player ``i``'s payoff at profile id ``p``.
    """

    action_counts: tuple[int, ...]
    utilities: np.ndarray  # shape (n, num_profiles), float64, read-only

    def __post_init__(self) -> None:
        counts = tuple(int(k) for k in self.action_counts)
        if len(counts) < 1 or any(k < 1 for k in counts):
            raise UsageError("need at least one player, each with at least one action")
        table = np.ascontiguousarray(self.utilities, dtype=np.float64)
        if table.shape != (len(counts), prod(counts)):
            raise UsageError(
                f"utilities must have shape ({len(counts)}, {prod(counts)}), "
                f"got {table.shape}"
            )
        table = table.copy()
        table.flags.writeable = False
        object.__setattr__(self, "action_counts", counts)
        object.__setattr__(self, "utilities", table)

    @property
    def n(self) -> int:
        return len(self.action_counts)

    @property
    def num_profiles(self) -> int:
        return self.utilities.shape[1]

    @property
    def strides(self) -> tuple[int, ...]:
        out, acc = [], 1
        for k in self.action_counts:
            out.append(acc)
            acc *= k
        return tuple(out)

    @property
    def u_min(self) -> float:
        return float(self.utilities.min())

    @property
    def u_max(self) -> float:
        return float(self.utilities.max())

    def profiles(self) -> range:
        return range(self.num_profiles)


@dataclass(frozen=True)
class ImprovementPath:
    """A chain of unilateral strictly-improving deviations.

    ``movers[k]`` is the player whose action changes between
    ``profiles[k]`` and ``profiles[k + 1]``.
    """

    profiles: tuple[int, ...]
    movers: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if len(self.movers) != max(len(self.profiles) - 1, 0):
            raise UsageError("need exactly one mover per path edge")

    def __len__(self) -> int:
        return len(self.movers)


def encode_profile(game: Game, actions: Sequence[int]) -> int:
    """Mixed-radix encoding of a joint action (player 0 least significant)."""
    if len(actions) != game.n:
        raise UsageError(f"expected {game.n} actions, got {len(actions)}")
    index = 0
    for i, (a, k, s) in enumerate(zip(actions, game.action_counts, game.strides)):
        if not 0 <= a < k:
            raise UsageError(f"action {a} out of range for player {i}")
        index += a * s
    return index


def decode_profile(game: Game, profile: int) -> tuple[int, ...]:
    """Inverse of :func:`encode_profile`."""
    _check_profile(game, profile)
    actions = []
    for k in game.action_counts:
        actions.append(profile % k)
        profile //= k
    return tuple(actions)


def _check_profile(game: Game, profile: int) -> None:
    if not 0 <= profile < game.num_profiles:
        raise UsageError(f"profile id {profile} out of range [0, {game.num_profiles})")


def _check_player(game: Game, player: int) -> None:
    if not 0 <= player < game.n:
        raise UsageError(f"player index {player} out of range [0, {game.n})")


def utility_at(game: Game, player: int, profile: int) -> float:
    """Payoff of ``player`` at ``profile``, exactly as stored."""
    _check_player(game, player)
    _check_profile(game, profile)
    return float(game.utilities[player, profile])


def unilateral_deviations(game: Game, profile: int, player: int) -> Iterator[int]:
    """Profiles reachable from ``profile`` by ``player`` changing action."""
    _check_player(game, player)
    _check_profile(game, profile)
    stride = game.strides[player]
    current = (profile // stride) % game.action_counts[player]
    base = profile - current * stride
    for a in range(game.action_counts[player]):
        if a != current:
            yield base + a * stride


def mover_between(game: Game, source: int, dest: int) -> int:
    """The single player whose action differs between two profiles.

    Raises ``UsageError`` unless the profiles differ in exactly one
    coordinate.
    """
    if source == dest:
        raise UsageError("profiles are identical; no move between them")
    a = decode_profile(game, source)
    b = decode_profile(game, dest)
    movers = [i for i in range(game.n) if a[i] != b[i]]
    if len(movers) != 1:
        raise UsageError(
            f"profiles {a} and {b} differ in {len(movers)} coordinates; "
            "expected a one-step transition"
        )
    return movers[0]


def better_replies(
    game: Game, profile: int, player: int
) -> tuple[set[int], int | None]:
    """Strictly improving unilateral deviations of ``player`` and the best one.

    The best reply maximizes the mover's utility; ties break toward the
    lowest deviating action index.  Returns ``(set(), None)`` when no
    deviation improves.
    """
    u_now = utility_at(game, player, profile)
    replies: set[int] = set()
    best: int | None = None
    best_u = u_now
    for dev in unilateral_deviations(game, profile, player):
        u_dev = float(game.utilities[player, dev])
        if u_dev > u_now:
            replies.add(dev)
            if u_dev > best_u:
                best_u = u_dev
                best = dev
    return replies, best


def pure_nash_equilibria(game: Game) -> set[int]:
    """Profiles from which no player has a strictly improving deviation."""
    out = set()
    for p in game.profiles():
        if all(not better_replies(game, p, i)[0] for i in range(game.n)):
            out.add(p)
    return out


def payoff_dominant_equilibria(game: Game) -> set[int]:
    """Pure Nash equilibria weakly preferred by every player to every profile."""
    row_max = game.utilities.max(axis=1)
    return {
        p
        for p in pure_nash_equilibria(game)
        if bool(np.all(game.utilities[:, p] >= row_max))
    }


def validate_positive_utility(game: Game) -> bool:
    """Whether every stored payoff is strictly positive."""
    return bool(np.all(game.utilities > 0.0))


def _reply_edges(game: Game, profile: int, best_only: bool) -> Iterator[tuple[int, int]]:
    for i in range(game.n):
        replies, best = better_replies(game, profile, i)
        if best_only:
            if best is not None:
                yield best, i
        else:
            for dev in sorted(replies):
                yield dev, i


def improvement_path_to(
    game: Game,
    start: int,
    targets: Iterable[int],
    best_reply_only: bool = False,
) -> ImprovementPath | None:
    """Shortest (best-)reply path from ``start`` into ``targets``, or ``None``.

    Breadth-first search over the better-reply digraph; the returned path
    never revisits a profile.  ``targets`` must be nonempty.
    """
    target_set = set(targets)
    if not target_set:
        raise UsageError("targets must be nonempty")
    for t in target_set:
        _check_profile(game, t)
    _check_profile(game, start)
    if start in target_set:
        return ImprovementPath(profiles=(start,))
    parent: dict[int, tuple[int, int]] = {}
    visited = {start}
    queue = deque([start])
    while queue:
        p = queue.popleft()
        for dev, mover in _reply_edges(game, p, best_reply_only):
            if dev in visited:
                continue
            visited.add(dev)
            parent[dev] = (p, mover)
            if dev in target_set:
                profiles, movers = [dev], []
                node = dev
                while node != start:
                    prev, m = parent[node]
                    profiles.append(prev)
                    movers.append(m)
                    node = prev
                return ImprovementPath(
                    profiles=tuple(reversed(profiles)), movers=tuple(reversed(movers))
                )
            queue.append(dev)
    return None


def is_weakly_acyclic(game: Game) -> tuple[bool, dict[int, ImprovementPath]]:
    """Whether every non-equilibrium profile can improve its way to a pure Nash.

    On success the witness map holds one shortest better-reply path per
    non-equilibrium profile.
    """
    ne = pure_nash_equilibria(game)
    witnesses: dict[int, ImprovementPath] = {}
    if not ne:
        return (game.num_profiles == 0, witnesses)
    for p in game.profiles():
        if p in ne:
            continue
        path = improvement_path_to(game, p, ne)
        if path is None:
            return False, {}
        witnesses[p] = path
    return True, witnesses


def game_from_dict(doc: dict) -> Game:
    """Build a game from ``{"action_counts": [...], "utilities": [[...], ...]}``.

    Profile order in each utility row is the mixed-radix encoding with
    player 0 as the least significant digit.
    """
    try:
        counts = tuple(int(k) for k in doc["action_counts"])
        utilities = np.asarray(doc["utilities"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed game document: {exc}") from exc
    return Game(action_counts=counts, utilities=utilities)


def game_to_dict(game: Game) -> dict:
    return {
        "action_counts": list(game.action_counts),
        "utilities": game.utilities.tolist(),
    }


def load_game(path: str) -> Game:
    with open(path, "r", encoding="utf-8") as handle:
        return game_from_dict(json.load(handle))


def require_weakly_acyclic(game: Game) -> dict[int, ImprovementPath]:
    flag, witnesses = is_weakly_acyclic(game)
    if not flag:
        raise GameStructureError("game is not weakly acyclic")
    return witnesses

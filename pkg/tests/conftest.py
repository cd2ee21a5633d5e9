"""Shared fixtures and random-game generators."""

from __future__ import annotations

import warnings
from math import prod

import numpy as np
import pytest

from apla_lab import Game, Params

# Profile ids in the 2x2 coordination game (player 0 least significant):
# 0 = (A,A), 1 = (B,A), 2 = (A,B), 3 = (B,B)
AA, BA, AB, BB = 0, 1, 2, 3


def make_params(**kwargs) -> Params:
    """Params constructor that silences the advisory warnings."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return Params(**kwargs)


@pytest.fixture
def staghunt() -> Game:
    # payoffs a=5, c=3, b=1, d=4; row tables indexed by profile id
    return Game(
        action_counts=(2, 2),
        utilities=np.array([[5.0, 3.0, 1.0, 4.0], [5.0, 1.0, 3.0, 4.0]]),
    )


@pytest.fixture
def staghunt_pla() -> Params:
    return make_params(epsilon=0.06, nu=0.06, lam=0.04, mode="pla")


@pytest.fixture
def staghunt_apla() -> Params:
    return make_params(
        epsilon=0.06, nu=0.06, lam=0.04, h=0.04, c_asp=30.0, mode="apla"
    )


def random_game(
    rng: np.random.Generator,
    action_counts: tuple[int, ...],
    low: float = 0.5,
    high: float = 5.0,
) -> Game:
    n = len(action_counts)
    num = prod(action_counts)
    return Game(
        action_counts=action_counts,
        utilities=rng.uniform(low, high, size=(n, num)),
    )


def random_potential_game(
    rng: np.random.Generator, action_counts: tuple[int, ...]
) -> Game:
    """Exact potential game with strictly positive payoffs.

    u_i(a) = potential(a) + offset_i(a_{-i}); unilateral payoff changes
    equal potential changes, so the game is weakly acyclic.
    """
    n = len(action_counts)
    num = prod(action_counts)
    potential = rng.uniform(1.0, 2.0, size=num)
    utilities = np.empty((n, num))
    strides = []
    acc = 1
    for k in action_counts:
        strides.append(acc)
        acc *= k
    for i in range(n):
        others_size = num // action_counts[i]
        offsets = rng.uniform(0.0, 1.0, size=others_size)
        for p in range(num):
            rest, digits = p, []
            for j, k in enumerate(action_counts):
                digit = rest % k
                rest //= k
                if j != i:
                    digits.append(digit)
            key = 0
            mult = 1
            for j, k in enumerate(action_counts):
                if j == i:
                    continue
                key += digits.pop(0) * mult
                mult *= k
            utilities[i, p] = potential[p] + offsets[key]
    return Game(action_counts=action_counts, utilities=utilities)

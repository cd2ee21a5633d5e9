"""Game representation and the combinatorial predicates."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apla_lab import (
    Game,
    UsageError,
    better_replies,
    decode_profile,
    encode_profile,
    game_from_dict,
    improvement_path_to,
    is_weakly_acyclic,
    payoff_dominant_equilibria,
    pure_nash_equilibria,
    utility_at,
    validate_positive_utility,
)
from apla_lab.games import game_to_dict, mover_between, unilateral_deviations

from conftest import AA, AB, BA, BB, random_game


@pytest.fixture
def matching_pennies_like() -> Game:
    # positive payoffs, no pure Nash equilibrium
    return Game(
        action_counts=(2, 2),
        utilities=np.array([[2.0, 1.0, 1.0, 2.0], [1.0, 2.0, 2.0, 1.0]]),
    )


class TestProfileCodec:
    def test_roundtrip_small(self, staghunt):
        for p in staghunt.profiles():
            assert encode_profile(staghunt, decode_profile(staghunt, p)) == p

    def test_player0_least_significant(self, staghunt):
        assert decode_profile(staghunt, 1) == (1, 0)
        assert decode_profile(staghunt, 2) == (0, 1)

    @given(
        counts=st.lists(st.integers(min_value=1, max_value=4), min_size=1, max_size=4)
    )
    @settings(max_examples=60, deadline=None)
    def test_roundtrip_exhaustive(self, counts):
        game = random_game(np.random.default_rng(0), tuple(counts))
        for p in game.profiles():
            assert encode_profile(game, decode_profile(game, p)) == p

    def test_out_of_range(self, staghunt):
        with pytest.raises(UsageError):
            decode_profile(staghunt, 4)
        with pytest.raises(UsageError):
            encode_profile(staghunt, (2, 0))


class TestUtilityAt:
    def test_staghunt_row_at_aa(self, staghunt):
        assert utility_at(staghunt, 0, AA) == 5.0

    def test_staghunt_column_at_ab(self, staghunt):
        assert utility_at(staghunt, 1, AB) == 3.0

    def test_degenerate_game(self):
        game = Game(action_counts=(1,), utilities=np.array([[1.0]]))
        assert utility_at(game, 0, 0) == 1.0

    def test_bad_indices(self, staghunt):
        with pytest.raises(UsageError):
            utility_at(staghunt, 2, 0)
        with pytest.raises(UsageError):
            utility_at(staghunt, 0, 17)


class TestPureNash:
    def test_staghunt(self, staghunt):
        assert pure_nash_equilibria(staghunt) == {AA, BB}

    def test_one_player_argmax(self):
        game = Game(action_counts=(3,), utilities=np.array([[2.0, 5.0, 1.0]]))
        assert pure_nash_equilibria(game) == {1}

    def test_no_pure_nash(self, matching_pennies_like):
        assert pure_nash_equilibria(matching_pennies_like) == set()

    @given(seed=st.integers(min_value=0, max_value=10**6))
    @settings(max_examples=40, deadline=None)
    def test_equilibria_have_no_better_replies(self, seed):
        rng = np.random.default_rng(seed)
        game = random_game(rng, (2, 3))
        ne = pure_nash_equilibria(game)
        for p in game.profiles():
            empty = all(not better_replies(game, p, i)[0] for i in range(game.n))
            assert (p in ne) == empty


class TestBetterReplies:
    def test_staghunt_row_at_ab(self, staghunt):
        replies, best = better_replies(staghunt, AB, 0)
        assert replies == {BB}
        assert best == BB

    def test_staghunt_row_at_aa(self, staghunt):
        replies, best = better_replies(staghunt, AA, 0)
        assert replies == set()
        assert best is None

    def test_single_action_player(self):
        game = Game(action_counts=(1, 2), utilities=np.array([[1.0, 2.0], [1.0, 2.0]]))
        assert better_replies(game, 0, 0) == (set(), None)

    def test_best_reply_tie_lowest_action(self):
        # actions 1 and 2 tie at payoff 9; the designated best reply is action 1
        game = Game(action_counts=(3,), utilities=np.array([[1.0, 9.0, 9.0]]))
        _, best = better_replies(game, 0, 0)
        assert best == 1


class TestImprovementPaths:
    def test_stag_hunt_best_reply_path(self, staghunt):
        targets = pure_nash_equilibria(staghunt)
        path = improvement_path_to(staghunt, AB, targets, best_reply_only=True)
        assert path is not None and len(path) == 1
        assert path.profiles[0] == AB and path.profiles[-1] in targets

    def test_start_in_targets(self, staghunt):
        path = improvement_path_to(staghunt, AA, {AA, BB})
        assert path is not None and len(path) == 0

    def test_empty_targets_rejected(self, staghunt):
        with pytest.raises(UsageError):
            improvement_path_to(staghunt, AB, set())

    def test_edges_strictly_improve(self, staghunt):
        path = improvement_path_to(staghunt, BA, pure_nash_equilibria(staghunt))
        for k, mover in enumerate(path.movers):
            u0 = utility_at(staghunt, mover, path.profiles[k])
            u1 = utility_at(staghunt, mover, path.profiles[k + 1])
            assert u1 > u0
            assert mover == mover_between(staghunt, path.profiles[k], path.profiles[k + 1])

    def test_no_revisits(self):
        rng = np.random.default_rng(3)
        game = random_game(rng, (2, 2, 2))
        ne = pure_nash_equilibria(game)
        if ne:
            for p in game.profiles():
                path = improvement_path_to(game, p, ne)
                if path is not None:
                    assert len(set(path.profiles)) == len(path.profiles)


class TestWeakAcyclicity:
    def test_staghunt(self, staghunt):
        flag, witnesses = is_weakly_acyclic(staghunt)
        assert flag
        assert set(witnesses) == {AB, BA}
        ne = pure_nash_equilibria(staghunt)
        for path in witnesses.values():
            assert path.profiles[-1] in ne
            for k, mover in enumerate(path.movers):
                assert utility_at(staghunt, mover, path.profiles[k + 1]) > utility_at(
                    staghunt, mover, path.profiles[k]
                )

    def test_no_pure_nash_is_not_weakly_acyclic(self, matching_pennies_like):
        flag, witnesses = is_weakly_acyclic(matching_pennies_like)
        assert not flag and witnesses == {}

    def test_one_player_always(self):
        game = Game(action_counts=(4,), utilities=np.array([[1.0, 3.0, 2.0, 0.5]]))
        assert is_weakly_acyclic(game)[0]


class TestPayoffDominance:
    def test_staghunt_selects_aa(self, staghunt):
        assert payoff_dominant_equilibria(staghunt) == {AA}

    def test_bb_excluded(self, staghunt):
        assert BB not in payoff_dominant_equilibria(staghunt)

    def test_identical_payoffs(self):
        game = Game(action_counts=(2, 2), utilities=np.full((2, 4), 3.0))
        assert payoff_dominant_equilibria(game) == {0, 1, 2, 3}

    @given(seed=st.integers(min_value=0, max_value=10**6))
    @settings(max_examples=30, deadline=None)
    def test_subset_of_nash(self, seed):
        game = random_game(np.random.default_rng(seed), (2, 2))
        assert payoff_dominant_equilibria(game) <= pure_nash_equilibria(game)


class TestPositiveUtility:
    def test_staghunt(self, staghunt):
        assert validate_positive_utility(staghunt)

    def test_zero_payoff(self):
        game = Game(action_counts=(2,), utilities=np.array([[0.0, 1.0]]))
        assert not validate_positive_utility(game)

    def test_tiny_positive(self):
        game = Game(action_counts=(2,), utilities=np.full((1, 2), 1e-9))
        assert validate_positive_utility(game)


class TestGameConstruction:
    def test_json_roundtrip(self, staghunt):
        doc = game_to_dict(staghunt)
        again = game_from_dict(doc)
        assert again.action_counts == staghunt.action_counts
        assert np.array_equal(again.utilities, staghunt.utilities)

    def test_bad_shape(self):
        with pytest.raises(UsageError):
            Game(action_counts=(2, 2), utilities=np.ones((2, 3)))

    def test_immutable_utilities(self, staghunt):
        with pytest.raises(ValueError):
            staghunt.utilities[0, 0] = 9.0

    def test_mover_between_rejects_two_step(self, staghunt):
        with pytest.raises(UsageError):
            mover_between(staghunt, AA, BB)
        with pytest.raises(UsageError):
            mover_between(staghunt, AA, AA)

    def test_deviation_count(self, staghunt):
        for p in staghunt.profiles():
            devs = [d for i in range(2) for d in unilateral_deviations(staghunt, p, i)]
            assert len(devs) == 2

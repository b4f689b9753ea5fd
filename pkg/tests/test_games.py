from fractions import Fraction
from itertools import product

import pytest

from entcoord.games import (
    MixedProfile,
    PayoffTable,
    allied_rps_game,
    driving_game,
    expected_payoff,
    payoff,
    point_mass_profile,
    pure_nash_equilibria,
    rps_pair_game,
    uniform_profile,
    verify_mixed_equilibrium,
)

ROCK, PAPER, SCISSORS = 0, 1, 2
L, R = 0, 1


def brute_force_is_nash(game, joint):
    """Independent deviation check used to validate pure_nash_equilibria."""
    for player in range(game.num_players):
        for alt in range(game.choices_per_player[player]):
            deviated = joint[:player] + (alt,) + joint[player + 1 :]
            if game.payoffs[deviated][player] > game.payoffs[joint][player]:
                return False
    return True


class TestDrivingGame:
    def test_entries(self):
        game = driving_game()
        assert payoff(game, (L, L)) == (2, 2)
        assert payoff(game, (R, R)) == (2, 2)
        assert payoff(game, (L, R)) == (-3, -3)
        assert payoff(game, (R, L)) == (-3, -3)

    def test_symmetric_under_label_swap(self):
        game = driving_game()
        for a, b in game.joint_choices():
            assert game.payoffs[(a, b)] == tuple(reversed(game.payoffs[(b, a)]))


class TestRpsPairGame:
    def test_all_entries(self):
        game = rps_pair_game()
        expected = {
            (ROCK, ROCK): (0, 0),
            (ROCK, PAPER): (0, 1),
            (ROCK, SCISSORS): (1, 0),
            (PAPER, ROCK): (1, 0),
            (PAPER, PAPER): (0, 0),
            (PAPER, SCISSORS): (0, 1),
            (SCISSORS, ROCK): (0, 1),
            (SCISSORS, PAPER): (1, 0),
            (SCISSORS, SCISSORS): (0, 0),
        }
        assert game.payoffs == expected

    def test_diagonal_is_draw(self):
        game = rps_pair_game()
        for c in range(3):
            assert game.payoffs[(c, c)] == (0, 0)


class TestAlliedRpsGame:
    def test_mismatched_allies_lose(self):
        game = allied_rps_game()
        assert payoff(game, (ROCK, PAPER, ROCK)) == (0, 0, 1)
        for a1, a2, opp in product(range(3), repeat=3):
            if a1 != a2:
                assert game.payoffs[(a1, a2, opp)] == (0, 0, 1)

    def test_matched_allies_lift_pair_payoffs(self):
        game = allied_rps_game()
        assert payoff(game, (PAPER, PAPER, ROCK)) == (1, 1, 0)
        assert payoff(game, (SCISSORS, SCISSORS, SCISSORS)) == (0, 0, 0)
        assert payoff(game, (ROCK, ROCK, SCISSORS)) == (1, 1, 0)

    def test_restriction_reproduces_pair_game(self):
        game = allied_rps_game()
        pair = rps_pair_game()
        for c, opp in pair.joint_choices():
            x, y = pair.payoffs[(c, opp)]
            assert game.payoffs[(c, c, opp)] == (x, x, y)


class TestPayoffLookup:
    def test_out_of_range(self):
        game = driving_game()
        with pytest.raises(ValueError):
            payoff(game, (0, 2))
        with pytest.raises(ValueError):
            payoff(game, (0, 1, 0))

    def test_vector_length(self):
        for game in (driving_game(), rps_pair_game(), allied_rps_game()):
            for joint in game.joint_choices():
                assert len(payoff(game, joint)) == game.num_players

    def test_table_requires_complete_payoffs(self):
        with pytest.raises(ValueError):
            PayoffTable("broken", (2, 2), {(0, 0): (1, 1)})


class TestPureNash:
    def test_driving(self):
        assert pure_nash_equilibria(driving_game()) == {(L, L), (R, R)}

    def test_rps_pair_has_none(self):
        assert pure_nash_equilibria(rps_pair_game()) == set()

    def test_trivial_single_choice_game(self):
        game = PayoffTable("trivial", (1,), {(0,): (5,)})
        assert pure_nash_equilibria(game) == {(0,)}

    @pytest.mark.parametrize("game", [driving_game(), rps_pair_game(), allied_rps_game()])
    def test_matches_independent_deviation_check(self, game):
        reported = pure_nash_equilibria(game)
        for joint in game.joint_choices():
            assert (joint in reported) == brute_force_is_nash(game, joint)


class TestExpectedPayoff:
    def test_rps_uniform_is_exactly_one_third(self):
        game = rps_pair_game()
        result = expected_payoff(game, uniform_profile(game))
        assert result == (Fraction(1, 3), Fraction(1, 3))

    def test_allied_rps_all_uniform(self):
        # enumeration of 27 equally likely outcomes gives (1/9, 1/9, 7/9)
        game = allied_rps_game()
        oracle = [Fraction(0)] * 3
        for joint in game.joint_choices():
            for i in range(3):
                oracle[i] += Fraction(1, 27) * game.payoffs[joint][i]
        assert tuple(oracle) == (Fraction(1, 9), Fraction(1, 9), Fraction(7, 9))
        assert expected_payoff(game, uniform_profile(game)) == tuple(oracle)

    def test_point_mass_reproduces_payoff(self):
        for game in (driving_game(), allied_rps_game()):
            for joint in game.joint_choices():
                result = expected_payoff(game, point_mass_profile(game, joint))
                assert tuple(result) == game.payoffs[joint]

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            expected_payoff(driving_game(), uniform_profile(rps_pair_game()))

    def test_multilinear_in_each_player(self):
        # exact check: mixing distributions commutes with mixing expectations
        game = allied_rps_game()
        import random

        rng = random.Random(5)

        def random_dist(k):
            cuts = sorted(rng.randint(0, 24) for _ in range(k - 1))
            parts = [a - b for a, b in zip(cuts + [24], [0] + cuts)]
            return tuple(Fraction(p, 24) for p in parts)

        for _ in range(25):
            base = [random_dist(3) for _ in range(3)]
            player = rng.randrange(3)
            p_dist, q_dist = random_dist(3), random_dist(3)
            alpha = Fraction(rng.randint(0, 8), 8)
            mixed = tuple(
                alpha * p + (1 - alpha) * q for p, q in zip(p_dist, q_dist)
            )
            profiles = []
            for dist in (mixed, p_dist, q_dist):
                dists = list(base)
                dists[player] = dist
                profiles.append(MixedProfile(tuple(dists)))
            lhs = expected_payoff(game, profiles[0])
            e_p = expected_payoff(game, profiles[1])
            e_q = expected_payoff(game, profiles[2])
            rhs = tuple(alpha * a + (1 - alpha) * b for a, b in zip(e_p, e_q))
            assert lhs == rhs


class TestVerifyMixedEquilibrium:
    def test_rps_uniform_verifies_exactly(self):
        game = rps_pair_game()
        check = verify_mixed_equilibrium(game, uniform_profile(game), tol=Fraction(0))
        assert check.is_equilibrium
        assert check.max_gain == 0

    def test_driving_point_mass_left(self):
        game = driving_game()
        profile = point_mass_profile(game, (L, L))
        check = verify_mixed_equilibrium(game, profile, tol=1e-12)
        assert check.is_equilibrium

    def test_driving_uniform_regression(self):
        # exhaustive deviation check: uniform play yields -1/2 and every pure
        # deviation also yields -1/2, so uniform is a (weak) equilibrium with
        # zero maximum gain
        game = driving_game()
        profile = uniform_profile(game)
        base = expected_payoff(game, profile)
        assert base == (Fraction(-1, 2), Fraction(-1, 2))
        oracle_gain = max(
            expected_payoff(
                game,
                MixedProfile(
                    tuple(
                        tuple(1 if i == alt else 0 for i in range(2)) if p == player else dist
                        for p, dist in enumerate(profile.distributions)
                    )
                ),
            )[player]
            - base[player]
            for player in range(2)
            for alt in range(2)
        )
        assert oracle_gain == 0
        check = verify_mixed_equilibrium(game, profile, tol=1e-12)
        assert check == (True, Fraction(0))

    def test_detects_non_equilibrium(self):
        game = driving_game()
        profile = MixedProfile(((Fraction(3, 4), Fraction(1, 4)), (Fraction(1, 4), Fraction(3, 4))))
        check = verify_mixed_equilibrium(game, profile, tol=1e-12)
        assert not check.is_equilibrium
        assert check.max_gain > 0


class TestMixedProfile:
    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            MixedProfile(((-0.1, 1.1),))

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            MixedProfile(((0.5, 0.4),))

    def test_accepts_floats_within_tolerance(self):
        MixedProfile(((0.1, 0.2, 0.7), (1 / 3, 1 / 3, 1 / 3)))

"""Normal-form games for the coordination study: payoff tables and equilibrium checks.

Payoff entries in the built-in games are exact integers, so equilibrium
verification runs in rational arithmetic with zero tolerance when given
``Fraction`` probabilities.  Monte Carlo code converts tables to float arrays
via ``PayoffTable.to_array``.  Everything here is immutable and pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator, NamedTuple, Sequence

import numpy as np

LEFT, RIGHT = 0, 1
ROCK, PAPER, SCISSORS = 0, 1, 2
RPS_LABELS = ("rock", "paper", "scissors")


@dataclass(frozen=True, eq=False)
class PayoffTable:
    """n-player game: one payoff vector for every joint choice."""

    name: str
    choices_per_player: tuple[int, ...]
    payoffs: dict[tuple[int, ...], tuple]
    choice_labels: tuple[tuple[str, ...], ...] | None = None

    def __post_init__(self) -> None:
        if not self.choices_per_player or any(c < 1 for c in self.choices_per_player):
            raise ValueError("every player needs at least one choice")
        expected = set(product(*(range(c) for c in self.choices_per_player)))
        if set(self.payoffs) != expected:
            raise ValueError(f"payoffs for {self.name!r} must cover every joint choice")
        n = len(self.choices_per_player)
        if any(len(vec) != n for vec in self.payoffs.values()):
            raise ValueError("every payoff vector needs one entry per player")
        if self.choice_labels is not None:
            if len(self.choice_labels) != n or any(
                len(labels) != c
                for labels, c in zip(self.choice_labels, self.choices_per_player)
            ):
                raise ValueError("choice labels must match choices_per_player")

    @property
    def num_players(self) -> int:
        return len(self.choices_per_player)

    def joint_choices(self) -> Iterator[tuple[int, ...]]:
        return product(*(range(c) for c in self.choices_per_player))

    def label(self, player: int, choice: int) -> str:
        if self.choice_labels is None:
            return str(choice)
        return self.choice_labels[player][choice]

    def payoff_bounds(self) -> tuple[float, float]:
        values = [v for vec in self.payoffs.values() for v in vec]
        return float(min(values)), float(max(values))

    def to_array(self) -> np.ndarray:
        """Float payoff array of shape (*choices_per_player, num_players)."""
        arr = np.empty(self.choices_per_player + (self.num_players,), dtype=np.float64)
        for joint, vec in self.payoffs.items():
            arr[joint] = [float(v) for v in vec]
        return arr


@dataclass(frozen=True)
class MixedProfile:
    """One probability distribution over choices per player.

    Entries may be floats or ``Fraction``s; exact inputs keep every downstream
    computation exact.  Each distribution must be non-negative and sum to 1
    within 1e-12.
    """

    distributions: tuple[tuple, ...]

    def __post_init__(self) -> None:
        dists = tuple(tuple(d) for d in self.distributions)
        object.__setattr__(self, "distributions", dists)
        for dist in dists:
            if not dist:
                raise ValueError("empty distribution")
            if any(p < 0 for p in dist):
                raise ValueError(f"negative probability in {dist}")
            if abs(sum(dist) - 1) > 1e-12:
                raise ValueError(f"distribution {dist} does not sum to 1")


def uniform_profile(game: PayoffTable) -> MixedProfile:
    """Every player mixes uniformly (exact rational probabilities)."""
    return MixedProfile(
        tuple(tuple(Fraction(1, c) for _ in range(c)) for c in game.choices_per_player)
    )


def point_mass_profile(game: PayoffTable, joint: Sequence[int]) -> MixedProfile:
    """Degenerate profile playing the given joint choice with certainty."""
    return MixedProfile(
        tuple(
            tuple(1 if i == choice else 0 for i in range(c))
            for choice, c in zip(joint, game.choices_per_player)
        )
    )


def driving_game() -> PayoffTable:
    """Two drivers pick a side of the road; matching pays 2 each, colliding -3 each."""
    payoffs = {
        (LEFT, LEFT): (2, 2),
        (LEFT, RIGHT): (-3, -3),
        (RIGHT, LEFT): (-3, -3),
        (RIGHT, RIGHT): (2, 2),
    }
    return PayoffTable("driving", (2, 2), payoffs, (("L", "R"), ("L", "R")))


def rps_pair_game() -> PayoffTable:
    """Rock-paper-scissors between a coordinated pair and a single opponent.

    Player 0 is the pair's common choice, player 1 the opponent.  Choice c
    beats o exactly when (c - o) % 3 == 1; winners score 1, everyone else 0.
    """
    payoffs = {}
    for c in range(3):
        for o in range(3):
            if c == o:
                payoffs[(c, o)] = (0, 0)
            elif (c - o) % 3 == 1:
                payoffs[(c, o)] = (1, 0)
            else:
                payoffs[(c, o)] = (0, 1)
    return PayoffTable("rps-pair", (3, 3), payoffs, (RPS_LABELS, RPS_LABELS))


def allied_rps_game() -> PayoffTable:
    """Three-player RPS where two allies must match to have any chance of winning.

    Mismatched allies score zero and hand the opponent a payoff of 1; matched
    allies each receive the pair-versus-opponent payoff.
    """
    pair = rps_pair_game()
    payoffs = {}
    for a1, a2, opp in product(range(3), repeat=3):
        if a1 != a2:
            payoffs[(a1, a2, opp)] = (0, 0, 1)
        else:
            ally_value, opp_value = pair.payoffs[(a1, opp)]
            payoffs[(a1, a2, opp)] = (ally_value, ally_value, opp_value)
    return PayoffTable("allied-rps", (3, 3, 3), payoffs, (RPS_LABELS,) * 3)


def payoff(game: PayoffTable, joint: Sequence[int]) -> tuple:
    """Payoff vector stored for a joint choice."""
    joint = tuple(int(c) for c in joint)
    if len(joint) != game.num_players:
        raise ValueError(f"expected {game.num_players} choices, got {len(joint)}")
    if any(not 0 <= c < k for c, k in zip(joint, game.choices_per_player)):
        raise ValueError(f"choice out of range for {game.name!r}: {joint}")
    return game.payoffs[joint]


def _has_improving_deviation(game: PayoffTable, joint: tuple[int, ...]) -> bool:
    for player in range(game.num_players):
        current = game.payoffs[joint][player]
        for alt in range(game.choices_per_player[player]):
            if alt == joint[player]:
                continue
            deviated = joint[:player] + (alt,) + joint[player + 1 :]
            if game.payoffs[deviated][player] > current:
                return True
    return False


def pure_nash_equilibria(game: PayoffTable) -> set[tuple[int, ...]]:
    """Brute force over all joint choices; weak Nash (no strictly improving deviation)."""
    return {joint for joint in game.joint_choices() if not _has_improving_deviation(game, joint)}


def expected_payoff(game: PayoffTable, profile: MixedProfile) -> tuple:
    """Exact expectation of the payoff vector under independent mixing.

    Sums probability-weighted payoffs over every joint choice; with
    ``Fraction`` probabilities the result is an exact rational vector.
    Raises ``ValueError`` when the profile shape does not match the game.
    """
    dists = profile.distributions
    if len(dists) != game.num_players or any(
        len(d) != c for d, c in zip(dists, game.choices_per_player)
    ):
        raise ValueError(f"profile shape does not match game {game.name!r}")
    totals = [0] * game.num_players
    for joint in game.joint_choices():
        weight = 1
        for player, choice in enumerate(joint):
            weight = weight * dists[player][choice]
        if weight == 0:
            continue
        vec = game.payoffs[joint]
        for i in range(game.num_players):
            totals[i] = totals[i] + weight * vec[i]
    return tuple(totals)


class EquilibriumCheck(NamedTuple):
    is_equilibrium: bool
    max_gain: object


def verify_mixed_equilibrium(game: PayoffTable, profile: MixedProfile, tol=1e-12) -> EquilibriumCheck:
    """Check that no player improves by more than ``tol`` via any pure deviation.

    Returns the verdict together with the maximum improvement found (exact
    when the profile is exact).
    """
    base = expected_payoff(game, profile)
    max_gain = None
    for player in range(game.num_players):
        for alt in range(game.choices_per_player[player]):
            dists = list(profile.distributions)
            dists[player] = tuple(
                1 if i == alt else 0 for i in range(game.choices_per_player[player])
            )
            deviated = expected_payoff(game, MixedProfile(tuple(dists)))
            gain = deviated[player] - base[player]
            if max_gain is None or gain > max_gain:
                max_gain = gain
    return EquilibriumCheck(bool(max_gain <= tol), max_gain)

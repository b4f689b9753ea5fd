"""Choice mechanisms for allied players, and adversary policies that exploit leakage.

A mechanism turns a per-round stream of uniform draws into one choice per ally
plus a leakage record describing what an adversary can observe before play.
The positions each kind reads from the stream are fixed, so a draw is a pure
function of the stream and rounds can be evaluated in any order:

    independent    u[0..n-1]  one private draw per ally; leaks nothing
    preshared      u[0]       shared choice floor(u * k); the whole sequence is
                              committed before play, so the choices themselves leak
    prng           u[0]       the same draw, produced lazily from a shared
                              deterministic stream; the stream identity leaks
    private-coin   u[0] coin, u[1] jam draw, u[2..n] fallbacks for allies 1..n-1;
                              channel events (jammed / detected) leak
    entangled      u[0]       one joint measurement of the shared state; leaks nothing

The harness necessarily generates every draw, including "entangled" ones, from
ordinary pseudorandomness; the security differences between mechanisms are
modeled entirely through the leakage records, not through actual
unpredictability.

Mechanisms and adversary models are immutable; ``draw_choices`` and
``adversary_choice`` are pure given their uniform inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .games import PayoffTable
from .states import StateVector, measure

MECHANISM_KINDS = ("independent", "preshared", "prng", "private-coin", "entangled")
ADVERSARY_KINDS = ("uniform", "observer", "seed-cracker", "jammer")


@dataclass(frozen=True)
class NoLeakage:
    """Nothing observable before play."""


@dataclass(frozen=True)
class FullChoices:
    """Pre-committed choices an observer can read before the round is played."""

    choices: tuple[int, ...]


@dataclass(frozen=True)
class SeedStream:
    """Output of the allies' deterministic stream.

    Carried so that an adversary which has cracked the seed can reproduce the
    round's choices; adversaries that have not cracked it ignore the record.
    """

    choices: tuple[int, ...]


@dataclass(frozen=True)
class ChannelEvent:
    """Broadcast-channel outcome for a private-coin round."""

    jammed: bool
    detected: bool


Leakage = Union[NoLeakage, FullChoices, SeedStream, ChannelEvent]

LEAKAGE_BY_KIND = {
    "independent": NoLeakage,
    "preshared": FullChoices,
    "prng": SeedStream,
    "private-coin": ChannelEvent,
    "entangled": NoLeakage,
}


@dataclass(frozen=True)
class Mechanism:
    """How the allies obtain per-round choices.

    ``kind`` is one of ``MECHANISM_KINDS`` (the same stable names used in
    configs and on the command line).  ``jam_probability`` applies only to
    private-coin; ``state`` only to entangled, where its shape must match
    (num_allies, num_choices).
    """

    kind: str
    num_allies: int
    num_choices: int
    jam_probability: float = 0.0
    state: StateVector | None = None

    def __post_init__(self) -> None:
        if self.kind not in MECHANISM_KINDS:
            raise ValueError(f"unknown mechanism kind {self.kind!r}")
        if self.num_allies < 1 or self.num_choices < 1:
            raise ValueError("num_allies and num_choices must be positive")
        if self.kind == "entangled":
            if self.state is None:
                raise ValueError("entangled mechanism requires a state")
            if (
                self.state.num_parties != self.num_allies
                or self.state.num_outcomes != self.num_choices
            ):
                raise ValueError(
                    "entangled state shape "
                    f"({self.state.num_parties} parties, {self.state.num_outcomes} outcomes) "
                    f"does not match ({self.num_allies} allies, {self.num_choices} choices)"
                )
        elif self.state is not None:
            raise ValueError(f"{self.kind!r} mechanism does not take a state")
        if not 0.0 <= self.jam_probability <= 1.0:
            raise ValueError(f"jam_probability must lie in [0, 1], got {self.jam_probability}")
        if self.kind != "private-coin" and self.jam_probability != 0.0:
            raise ValueError("jam_probability applies only to private-coin")

    @classmethod
    def independent(cls, num_allies: int, num_choices: int) -> "Mechanism":
        return cls("independent", num_allies, num_choices)

    @classmethod
    def preshared(cls, num_allies: int, num_choices: int) -> "Mechanism":
        return cls("preshared", num_allies, num_choices)

    @classmethod
    def prng(cls, num_allies: int, num_choices: int) -> "Mechanism":
        return cls("prng", num_allies, num_choices)

    @classmethod
    def private_coin(cls, num_allies: int, num_choices: int, jam_probability: float) -> "Mechanism":
        return cls("private-coin", num_allies, num_choices, jam_probability=jam_probability)

    @classmethod
    def entangled(cls, state: StateVector) -> "Mechanism":
        return cls("entangled", state.num_parties, state.num_outcomes, state=state)


@dataclass(frozen=True)
class RoundDraw:
    """Choices the allies will play this round, plus what the adversary saw."""

    choices: tuple[int, ...]
    leakage: Leakage


@dataclass(frozen=True)
class AdversaryModel:
    """Opponent policy as a function of leaked information.

    ``crack_after_round`` is only consulted by the seed-cracker: from that
    round on it reads the allies' deterministic stream and best-responds.
    """

    kind: str
    crack_after_round: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ADVERSARY_KINDS:
            raise ValueError(f"unknown adversary kind {self.kind!r}")
        if self.crack_after_round < 0:
            raise ValueError("crack_after_round must be non-negative")


def _uniform_choice(u: float, num_choices: int) -> int:
    # u < 1 guarantees floor(u * k) < k mathematically; the min() guards the
    # pathological float rounding case
    return min(int(u * num_choices), num_choices - 1)


def _require(u_stream: Sequence[float], needed: int) -> None:
    if len(u_stream) < needed:
        raise ValueError(f"u_stream exhausted: need {needed} uniforms, got {len(u_stream)}")


def draw_choices(mechanism: Mechanism, round_index: int, u_stream: Sequence[float]) -> RoundDraw:
    """Draw one round of ally choices from the round's uniform substream.

    ``round_index`` is carried for bookkeeping only; all randomness comes from
    ``u_stream``, whose derivation already encodes the round.  See the module
    docstring for the positions each kind reads.
    """
    n, k = mechanism.num_allies, mechanism.num_choices
    kind = mechanism.kind
    if kind == "independent":
        _require(u_stream, n)
        return RoundDraw(tuple(_uniform_choice(u_stream[i], k) for i in range(n)), NoLeakage())
    if kind in ("preshared", "prng"):
        _require(u_stream, 1)
        choices = (_uniform_choice(u_stream[0], k),) * n
        if kind == "preshared":
            return RoundDraw(choices, FullChoices(choices))
        return RoundDraw(choices, SeedStream(choices))
    if kind == "private-coin":
        _require(u_stream, 2)
        coin = _uniform_choice(u_stream[0], k)
        jammed = u_stream[1] < mechanism.jam_probability
        if jammed and n > 1:
            _require(u_stream, n + 1)
            fallbacks = tuple(_uniform_choice(u_stream[i + 1], k) for i in range(1, n))
            choices = (coin,) + fallbacks
        else:
            choices = (coin,) * n
        return RoundDraw(choices, ChannelEvent(jammed=jammed, detected=jammed))
    # entangled: one joint sample, ally i takes outcome i
    _require(u_stream, 1)
    profile = measure(mechanism.state, u_stream[0])
    return RoundDraw(tuple(profile), NoLeakage())


def best_response(game: PayoffTable, opponent_index: int, known_choices: Sequence[int]) -> int:
    """The opponent's payoff-maximizing choice given everyone else's choices.

    ``known_choices`` lists the other players' choices in player order with
    the opponent's slot removed.  Ties break toward the lowest choice index.
    """
    if len(known_choices) != game.num_players - 1:
        raise ValueError("known_choices must cover every player except the opponent")
    known = tuple(int(c) for c in known_choices)
    best, best_value = 0, None
    for candidate in range(game.choices_per_player[opponent_index]):
        joint = known[:opponent_index] + (candidate,) + known[opponent_index:]
        value = game.payoffs[joint][opponent_index]
        if best_value is None or value > best_value:
            best, best_value = candidate, value
    return best


def adversary_choice(
    adversary: AdversaryModel,
    leakage: Leakage,
    history: Sequence[Leakage],
    game: PayoffTable,
    u: float,
) -> int:
    """The adversary's choice for the current round.

    The adversary occupies the game's last player slot, and the current round
    index is ``len(history)``.  An observer exploits pre-committed choices, a
    seed-cracker exploits the deterministic stream once past its crack round,
    and everything else (including the jammer, whose influence lives in the
    mechanism's jam probability) draws uniformly from ``u``.
    """
    opponent_index = game.num_players - 1
    if adversary.kind == "observer" and isinstance(leakage, FullChoices):
        return best_response(game, opponent_index, leakage.choices)
    if (
        adversary.kind == "seed-cracker"
        and isinstance(leakage, SeedStream)
        and len(history) >= adversary.crack_after_round
    ):
        return best_response(game, opponent_index, leakage.choices)
    return _uniform_choice(u, game.choices_per_player[opponent_index])

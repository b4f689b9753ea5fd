"""Reproducible Monte Carlo harness for game x mechanism x adversary runs.

Determinism contract: every run is a pure function of its ExperimentConfig.
All uniforms come from a single Philox counter-based generator keyed by
``master_seed`` and laid out as a (rounds, num_allies + 2) matrix.  Philox
output at counter c depends only on (key, c), so row r is a fixed function of
(master_seed, r) and serves as round r's independent substream:

    columns 0..n    read by the mechanism (see the mechanisms module)
    column  n+1     the adversary's uniform draw

Rounds are simulated into preallocated per-round arrays (optionally in
parallel chunks) and statistics are always reduced from the fully assembled
arrays, so chunked, threaded, and serial execution produce bit-identical
results.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .games import PayoffTable, allied_rps_game, driving_game, rps_pair_game
from .mechanisms import (
    ADVERSARY_KINDS,
    MECHANISM_KINDS,
    AdversaryModel,
    Mechanism,
    best_response,
)
from .states import (
    StateVector,
    bell_state,
    biased_pair_state,
    born_distribution,
    decode_joint_index,
    decode_joint_indices,
    sample_joint_indices,
)

RESULT_FORMATS = ("csv", "json")
CSV_COLUMNS = (
    "game",
    "mechanism",
    "adversary",
    "rounds",
    "seed",
    "player_index",
    "mean_payoff",
    "std_err",
    "coordination_rate",
)

_DEFAULT_CHUNK_ROUNDS = 1 << 17


@dataclass(frozen=True)
class GameSpec:
    """A named game wired into the harness: payoff table plus player roles.

    Allies occupy player indices 0..num_allies-1; the adversary, when present,
    is the last player.
    """

    table: PayoffTable
    num_allies: int
    num_adversaries: int


def _biased_pair_table() -> PayoffTable:
    # the two-option coordination payoffs, relabeled for the biased-pair scenario
    base = driving_game()
    return replace(base, name="biased-pair", choice_labels=(("A", "B"), ("A", "B")))


GAME_REGISTRY: dict[str, GameSpec] = {
    "driving": GameSpec(driving_game(), num_allies=2, num_adversaries=0),
    "biased-pair": GameSpec(_biased_pair_table(), num_allies=2, num_adversaries=0),
    "allied-rps": GameSpec(allied_rps_game(), num_allies=2, num_adversaries=1),
    "rps-pair": GameSpec(rps_pair_game(), num_allies=1, num_adversaries=1),
}
GAME_NAMES = tuple(GAME_REGISTRY)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one run; two equal configs give bit-identical results.

    The config is a shared parameter bundle: each mechanism consumes the
    parameters it understands and ignores the rest, which lets one bundle
    drive a comparison across mechanisms.  ``coeff_a``/``coeff_b`` select the
    biased two-party state for the entangled mechanism (requires 2 allies
    with 2 choices each); without them the entangled mechanism uses the
    maximally correlated state.  ``jam_probability`` applies to private-coin,
    ``crack_after_round`` to the seed-cracker adversary.
    ``detection_penalty`` is subtracted from each ally's payoff on rounds
    whose broadcast was detected (private-coin only); it defaults to 0.
    """

    game: str
    mechanism: str
    rounds: int
    master_seed: int
    adversary: str | None = None
    crack_after_round: int = 0
    jam_probability: float = 0.0
    coeff_a: float | None = None
    coeff_b: float | None = None
    detection_penalty: float = 0.0
    out_path: str | None = None
    out_format: str = "csv"

    def __post_init__(self) -> None:
        if self.game not in GAME_REGISTRY:
            raise ValueError(f"unknown game {self.game!r}, expected one of {GAME_NAMES}")
        if self.mechanism not in MECHANISM_KINDS:
            raise ValueError(
                f"unknown mechanism {self.mechanism!r}, expected one of {MECHANISM_KINDS}"
            )
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.out_format not in RESULT_FORMATS:
            raise ValueError(f"unknown output format {self.out_format!r}")
        spec = GAME_REGISTRY[self.game]
        if spec.num_adversaries == 0:
            if self.adversary is not None:
                raise ValueError(f"game {self.game!r} has no adversary slot")
        else:
            if self.adversary not in ADVERSARY_KINDS:
                raise ValueError(
                    f"game {self.game!r} needs an adversary from {ADVERSARY_KINDS}, "
                    f"got {self.adversary!r}"
                )
        if self.crack_after_round < 0:
            raise ValueError("crack_after_round must be non-negative")
        if not 0.0 <= self.jam_probability <= 1.0:
            raise ValueError("jam_probability must lie in [0, 1]")
        if (self.coeff_a is None) != (self.coeff_b is None):
            raise ValueError("coeff_a and coeff_b must be given together")
        if self.coeff_a is not None and self.mechanism == "entangled":
            k = spec.table.choices_per_player[0]
            if spec.num_allies != 2 or k != 2:
                raise ValueError("state coefficients need 2 allies with 2 choices each")
        if self.detection_penalty < 0:
            raise ValueError("detection_penalty must be non-negative")


def pair_state_from_coefficients(a: float, b: float) -> StateVector:
    """Biased pair state from user-supplied coefficients.

    Gives rounded inputs the same sloppiness budget as raw amplitudes: a norm
    residual up to 1e-6 is rescaled away, anything beyond is rejected with the
    residual reported.
    """
    total = 2.0 * abs(a) ** 2 + 2.0 * abs(b) ** 2
    if abs(total - 1.0) <= 1e-6:
        scale = math.sqrt(total)
        a, b = a / scale, b / scale
    return biased_pair_state(a, b)


def build_mechanism(config: ExperimentConfig) -> Mechanism:
    """The Mechanism instance a config describes."""
    spec = GAME_REGISTRY[config.game]
    n, k = spec.num_allies, spec.table.choices_per_player[0]
    if config.mechanism == "entangled":
        if config.coeff_a is not None:
            state = pair_state_from_coefficients(config.coeff_a, config.coeff_b)
        elif n == 1:
            # single coordinated player (e.g. rps-pair): a one-party uniform
            # superposition, measuring to a uniform choice
            state = StateVector(1, k, np.full(k, 1.0 / math.sqrt(k), dtype=np.complex128))
        else:
            state = bell_state(n, k)
        return Mechanism.entangled(state)
    if config.mechanism == "private-coin":
        return Mechanism.private_coin(n, k, config.jam_probability)
    return Mechanism(config.mechanism, n, k)


def build_adversary(config: ExperimentConfig) -> AdversaryModel | None:
    if config.adversary is None:
        return None
    return AdversaryModel(config.adversary, crack_after_round=config.crack_after_round)


def round_uniforms(config: ExperimentConfig) -> np.ndarray:
    """The (rounds, num_allies + 2) uniform matrix; row r is round r's substream."""
    num_allies = GAME_REGISTRY[config.game].num_allies
    generator = np.random.Generator(np.random.Philox(key=config.master_seed))
    return generator.random((config.rounds, num_allies + 2))


def _floor_choices(u: np.ndarray, num_choices: int) -> np.ndarray:
    return np.minimum((u * num_choices).astype(np.int64), num_choices - 1)


def _mechanism_choices(
    mechanism: Mechanism, u: np.ndarray
) -> tuple[np.ndarray, np.ndarray | None]:
    """Vectorized counterpart of draw_choices; reads the same stream positions."""
    n, k = mechanism.num_allies, mechanism.num_choices
    kind = mechanism.kind
    if kind == "independent":
        return _floor_choices(u[:, :n], k), None
    if kind in ("preshared", "prng"):
        shared = _floor_choices(u[:, 0], k)
        return np.repeat(shared[:, None], n, axis=1), None
    if kind == "private-coin":
        coin = _floor_choices(u[:, 0], k)
        jammed = u[:, 1] < mechanism.jam_probability
        choices = np.repeat(coin[:, None], n, axis=1)
        if n > 1:
            fallbacks = _floor_choices(u[:, 2 : n + 1], k)
            choices[:, 1:] = np.where(jammed[:, None], fallbacks, choices[:, 1:])
        return choices, jammed
    indices = sample_joint_indices(mechanism.state, u[:, 0])
    return decode_joint_indices(indices, n, k), None


def _best_response_table(table: PayoffTable) -> np.ndarray:
    """Adversary best responses indexed by the allies' joint choice."""
    opponent = table.num_players - 1
    shape = table.choices_per_player[:opponent]
    out = np.empty(shape, dtype=np.int64)
    for joint in product(*(range(c) for c in shape)):
        out[joint] = best_response(table, opponent, joint)
    return out


def _adversary_choices(
    adversary: AdversaryModel,
    mechanism: Mechanism,
    table: PayoffTable,
    ally_choices: np.ndarray,
    u_adv: np.ndarray,
    first_round: int,
) -> np.ndarray:
    """Vectorized counterpart of adversary_choice for a block of rounds."""
    num_choices = table.choices_per_player[-1]
    uninformed = _floor_choices(u_adv, num_choices)
    if adversary.kind == "observer" and mechanism.kind == "preshared":
        return _best_response_table(table)[tuple(ally_choices.T)]
    if adversary.kind == "seed-cracker" and mechanism.kind == "prng":
        informed = _best_response_table(table)[tuple(ally_choices.T)]
        rounds = first_round + np.arange(len(u_adv))
        return np.where(rounds >= adversary.crack_after_round, informed, uninformed)
    return uninformed


@dataclass(frozen=True, eq=False)
class SimulationTrace:
    """Per-round record of one simulated run, in round order."""

    ally_choices: np.ndarray  # (rounds, num_allies)
    adversary_choices: np.ndarray | None  # (rounds,)
    payoffs: np.ndarray  # (rounds, num_players)
    coordinated: np.ndarray  # (rounds,) bool
    jammed: np.ndarray | None  # (rounds,) bool, private-coin only


def simulate_rounds(
    config: ExperimentConfig,
    *,
    parallel: bool = False,
    chunk_rounds: int = _DEFAULT_CHUNK_ROUNDS,
) -> SimulationTrace:
    """Simulate every round of a config into per-round arrays.

    With ``parallel=True`` chunks of rounds are filled by a thread pool; each
    chunk writes a disjoint slice of the preallocated arrays, so the result is
    identical to the serial one.
    """
    spec = GAME_REGISTRY[config.game]
    table = spec.table
    mechanism = build_mechanism(config)
    adversary = build_adversary(config)
    uniforms = round_uniforms(config)
    rounds, n = config.rounds, spec.num_allies

    ally = np.empty((rounds, n), dtype=np.int64)
    adv = np.empty(rounds, dtype=np.int64) if adversary is not None else None
    jammed = np.empty(rounds, dtype=bool) if mechanism.kind == "private-coin" else None

    def fill(lo: int) -> None:
        hi = min(lo + chunk_rounds, rounds)
        block, block_jammed = _mechanism_choices(mechanism, uniforms[lo:hi])
        ally[lo:hi] = block
        if jammed is not None:
            jammed[lo:hi] = block_jammed
        if adv is not None:
            adv[lo:hi] = _adversary_choices(
                adversary, mechanism, table, block, uniforms[lo:hi, -1], lo
            )

    starts = range(0, rounds, chunk_rounds)
    if parallel and rounds > chunk_rounds:
        with ThreadPoolExecutor() as pool:
            list(pool.map(fill, starts))
    else:
        for lo in starts:
            fill(lo)

    columns = [ally[:, i] for i in range(n)]
    if adv is not None:
        columns.append(adv)
    payoffs = table.to_array()[tuple(columns)]
    if jammed is not None and config.detection_penalty:
        payoffs[jammed, :n] -= config.detection_penalty
    coordinated = np.all(ally == ally[:, :1], axis=1)
    return SimulationTrace(ally, adv, payoffs, coordinated, jammed)


def _leakage_summary(
    mechanism_kind: str, rounds: int, jammed: np.ndarray | None
) -> dict[str, int]:
    if mechanism_kind == "private-coin":
        count = int(jammed.sum())
        return {"channel_event": rounds, "jammed": count, "detected": count}
    key = {
        "independent": "none",
        "entangled": "none",
        "preshared": "full_choices",
        "prng": "seed_stream",
    }[mechanism_kind]
    return {key: rounds}


@dataclass(frozen=True)
class ExperimentResult:
    """Aggregated statistics of one run, with the config echoed for provenance."""

    config: ExperimentConfig
    rounds: int
    mean_payoff: tuple[float, ...]
    std_err: tuple[float, ...]
    coordination_rate: float
    leakage_counts: Mapping[str, int]

    def __post_init__(self) -> None:
        if any(s < 0.0 for s in self.std_err):
            raise ValueError("standard errors must be non-negative")
        if not 0.0 <= self.coordination_rate <= 1.0:
            raise ValueError("coordination rate must lie in [0, 1]")
        spec = GAME_REGISTRY[self.config.game]
        lo, hi = spec.table.payoff_bounds()
        lo -= self.config.detection_penalty
        if any(not lo - 1e-9 <= m <= hi + 1e-9 for m in self.mean_payoff):
            raise ValueError("mean payoffs fall outside the game's payoff range")


def run_experiment(config: ExperimentConfig, *, parallel: bool = False) -> ExperimentResult:
    """Run the configured Monte Carlo experiment and aggregate statistics.

    Mean is the per-player sample mean, std_err the sample standard deviation
    over sqrt(rounds) (0 for a single round), and coordination_rate the
    fraction of rounds on which all allies chose identically.
    """
    trace = simulate_rounds(config, parallel=parallel)
    payoffs = trace.payoffs
    mean = payoffs.mean(axis=0)
    if config.rounds > 1:
        std_err = payoffs.std(axis=0, ddof=1) / math.sqrt(config.rounds)
    else:
        std_err = np.zeros(payoffs.shape[1])
    return ExperimentResult(
        config=config,
        rounds=config.rounds,
        mean_payoff=tuple(float(x) for x in mean),
        std_err=tuple(float(x) for x in std_err),
        coordination_rate=float(trace.coordinated.mean()),
        leakage_counts=_leakage_summary(config.mechanism, config.rounds, trace.jammed),
    )


_ANALYTIC_MECHANISMS = ("independent", "preshared", "entangled")
_ANALYTIC_ADVERSARIES = (None, "uniform", "observer")


def analytic_expected_result(config: ExperimentConfig) -> tuple[Fraction, ...]:
    """Exact expected payoffs by enumerating the joint choice distribution.

    This is the brute-force oracle against which Monte Carlo output is
    validated.  Supported: independent, preshared, and entangled mechanisms
    against no adversary, the uniform adversary, or the observer; anything
    else raises ``ValueError``.  Results are exact rationals; entangled-state
    probabilities enter as exact rationals of their float values, renormalized
    to a true distribution.
    """
    if (
        config.mechanism not in _ANALYTIC_MECHANISMS
        or config.adversary not in _ANALYTIC_ADVERSARIES
    ):
        raise ValueError(
            "analytic result unsupported for "
            f"mechanism={config.mechanism!r}, adversary={config.adversary!r}"
        )
    spec = GAME_REGISTRY[config.game]
    table = spec.table
    n, k = spec.num_allies, table.choices_per_player[0]

    if config.mechanism == "independent":
        weight = Fraction(1, k**n)
        ally_dist = [(joint, weight) for joint in product(range(k), repeat=n)]
    elif config.mechanism == "preshared":
        ally_dist = [((c,) * n, Fraction(1, k)) for c in range(k)]
    else:
        state = build_mechanism(config).state
        probs = born_distribution(state).probabilities
        # exact rationals of the float probabilities, renormalized so the
        # enumerated weights form an exact distribution
        raw = [(i, Fraction(float(p))) for i, p in enumerate(probs) if p > 0.0]
        total = sum(weight for _, weight in raw)
        ally_dist = [
            (decode_joint_index(i, n, k), weight / total) for i, weight in raw
        ]

    totals = [Fraction(0)] * table.num_players

    def accumulate(joint: tuple[int, ...], weight: Fraction) -> None:
        vec = table.payoffs[joint]
        for i in range(table.num_players):
            totals[i] += weight * Fraction(vec[i])

    opponent = table.num_players - 1
    for ally_joint, weight in ally_dist:
        if config.adversary is None:
            accumulate(ally_joint, weight)
        elif config.adversary == "observer" and config.mechanism == "preshared":
            # pre-committed choices leak; the observer best-responds every round
            accumulate(ally_joint + (best_response(table, opponent, ally_joint),), weight)
        else:
            each = weight * Fraction(1, table.choices_per_player[opponent])
            for choice in range(table.choices_per_player[opponent]):
                accumulate(ally_joint + (choice,), each)
    return tuple(totals)


def compare_mechanisms(
    base_config: ExperimentConfig,
    mechanisms: Sequence[str],
    *,
    parallel: bool = False,
) -> list[ExperimentResult]:
    """Run the base config once per mechanism name, sharing the master seed."""
    return [
        run_experiment(replace(base_config, mechanism=name), parallel=parallel)
        for name in mechanisms
    ]


def _csv_rows(result: ExperimentResult):
    config = result.config
    adversary = config.adversary if config.adversary is not None else "none"
    for index in range(len(result.mean_payoff)):
        yield (
            config.game,
            config.mechanism,
            adversary,
            result.rounds,
            config.master_seed,
            index,
            f"{result.mean_payoff[index]:.6f}",
            f"{result.std_err[index]:.6f}",
            f"{result.coordination_rate:.6f}",
        )


def _json_entry(result: ExperimentResult) -> dict:
    config = result.config
    return {
        "game": config.game,
        "mechanism": config.mechanism,
        "adversary": config.adversary if config.adversary is not None else "none",
        "rounds": result.rounds,
        "seed": config.master_seed,
        "coordination_rate": result.coordination_rate,
        "players": [
            {
                "player_index": index,
                "mean_payoff": result.mean_payoff[index],
                "std_err": result.std_err[index],
            }
            for index in range(len(result.mean_payoff))
        ],
        "leakage": dict(result.leakage_counts),
        "config": asdict(config),
    }


def write_results(results, fmt: str, path) -> None:
    """Persist results: CSV with one row per player, or JSON mirroring the fields.

    The CSV columns are exactly ``CSV_COLUMNS`` with floats in fixed 6-decimal
    notation; the JSON variant additionally embeds each full config echo.
    Identical results serialize byte-identically.
    """
    if isinstance(results, ExperimentResult):
        results = [results]
    else:
        results = list(results)
    if fmt not in RESULT_FORMATS:
        raise ValueError(f"unknown output format {fmt!r}, expected one of {RESULT_FORMATS}")
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(CSV_COLUMNS)
            for result in results:
                writer.writerows(_csv_rows(result))
    else:
        payload = {"results": [_json_entry(result) for result in results]}
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)
            handle.write("\n")

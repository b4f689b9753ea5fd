"""Dense state vectors for small multi-party systems, with computational-basis sampling.

Joint outcomes are indexed base-k with party 0 as the most significant digit:
index = sum_p outcomes[p] * k**(n - 1 - p).  Constructors renormalize slightly
sloppy amplitude input (norm residual <= 1e-6) and reject anything worse;
after construction, probability checks hold to 1e-9.

All types here are immutable after construction and safe to share across
threads.  Sampling is a pure function of (state, u); randomness enters only
through the caller-supplied uniform draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NORM_ACCEPT_TOL = 1e-6
PROB_TOL = 1e-9
PAIR_COEFF_TOL = 1e-9
DIMENSION_CAP = 2**31


class NormalizationError(ValueError):
    """Amplitudes or pair coefficients too far from unit norm."""

    def __init__(self, residual: float, message: str):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True, eq=False)
class StateVector:
    """Joint state of ``num_parties`` subsystems with ``num_outcomes`` levels each.

    ``amplitudes`` has length k**n and is renormalized on construction; inputs
    whose squared norm misses 1 by more than ``NORM_ACCEPT_TOL`` are rejected.
    """

    num_parties: int
    num_outcomes: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.num_parties < 1:
            raise ValueError(f"num_parties must be positive, got {self.num_parties}")
        if self.num_outcomes < 1:
            raise ValueError(f"num_outcomes must be positive, got {self.num_outcomes}")
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        expected = self.num_outcomes**self.num_parties
        if amps.size != expected:
            raise ValueError(
                f"expected {expected} amplitudes for {self.num_parties} parties with "
                f"{self.num_outcomes} outcomes each, got {amps.size}"
            )
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        residual = abs(norm_sq - 1.0)
        if residual > NORM_ACCEPT_TOL:
            raise NormalizationError(residual, "state amplitudes are not normalized")
        amps = amps / math.sqrt(norm_sq)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dimension(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True, eq=False)
class ProbabilityTable:
    """Probabilities over joint outcomes, indexed like StateVector amplitudes."""

    probabilities: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probabilities, dtype=np.float64).reshape(-1)
        if probs.size == 0:
            raise ValueError("probability table cannot be empty")
        if np.any(probs < 0.0):
            raise ValueError("probabilities must be non-negative")
        total = float(probs.sum())
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {total!r}, expected 1 within {PROB_TOL}")
        probs.setflags(write=False)
        object.__setattr__(self, "probabilities", probs)


@dataclass(frozen=True)
class OutcomeProfile:
    """One measurement outcome per party, each in [0, num_outcomes)."""

    outcomes: tuple[int, ...]
    num_outcomes: int

    def __post_init__(self) -> None:
        outcomes = tuple(int(o) for o in self.outcomes)
        object.__setattr__(self, "outcomes", outcomes)
        if any(o < 0 or o >= self.num_outcomes for o in outcomes):
            raise ValueError(f"outcomes {outcomes} not all in [0, {self.num_outcomes})")

    def __iter__(self):
        return iter(self.outcomes)

    def __len__(self) -> int:
        return len(self.outcomes)

    def __getitem__(self, index: int) -> int:
        return self.outcomes[index]


def bell_state(num_parties: int = 2, num_outcomes: int = 2) -> StateVector:
    """Maximally correlated state: amplitude 1/sqrt(k) on every all-equal outcome.

    ``bell_state(2, 2)`` is the Bell pair (|00> + |11>)/sqrt(2); larger
    ``num_parties`` gives the GHZ generalization, larger ``num_outcomes`` the
    qudit one.  Measuring any of these yields identical outcomes for all
    parties.
    """
    if num_parties < 2:
        raise ValueError(f"entangled states need at least 2 parties, got {num_parties}")
    if num_outcomes < 2:
        raise ValueError(f"entangled states need at least 2 outcomes, got {num_outcomes}")
    dim = num_outcomes**num_parties
    if dim > DIMENSION_CAP:
        raise OverflowError(
            f"joint outcome space {num_outcomes}**{num_parties} exceeds cap {DIMENSION_CAP}"
        )
    amps = np.zeros(dim, dtype=np.complex128)
    # the all-equal outcome (i, i, ..., i) sits at index i * (k**n - 1)/(k - 1)
    stride = (dim - 1) // (num_outcomes - 1)
    amp = 1.0 / math.sqrt(num_outcomes)
    for i in range(num_outcomes):
        amps[i * stride] = amp
    return StateVector(num_parties, num_outcomes, amps)


ghz_state = bell_state


def biased_pair_state(a: complex, b: complex) -> StateVector:
    """Two-party state a|AA> + b|AB> + b|BA> + a|BB>.

    The coefficients must satisfy 2|a|^2 + 2|b|^2 = 1 (tolerance 1e-9).  |a|^2
    weights the matching outcomes, |b|^2 the mismatched ones; either party's
    marginal is uniform regardless of a and b, so a single observed choice
    carries no information about the bias.  Complex coefficients are accepted.
    """
    residual = abs(2.0 * abs(a) ** 2 + 2.0 * abs(b) ** 2 - 1.0)
    if residual > PAIR_COEFF_TOL:
        raise NormalizationError(
            residual, "pair coefficients must satisfy 2|a|^2 + 2|b|^2 = 1"
        )
    return StateVector(2, 2, np.array([a, b, b, a], dtype=np.complex128))


def born_distribution(state: StateVector) -> ProbabilityTable:
    """Squared-modulus probability of each joint outcome."""
    return ProbabilityTable(np.abs(state.amplitudes) ** 2)


def sample_joint_indices(state: StateVector, u_values) -> np.ndarray:
    """Inverse-CDF joint samples: first index whose cumulative probability exceeds u.

    Zero-probability outcomes contribute nothing to the cumulative sum, so
    they can never be selected.  Vectorized over ``u_values``; both
    ``measure`` and the Monte Carlo harness go through here, so the two paths
    cannot diverge.
    """
    u = np.asarray(u_values, dtype=np.float64)
    if np.any(u < 0.0) or np.any(u >= 1.0):
        raise ValueError("uniform draws must lie in [0, 1)")
    probs = np.abs(state.amplitudes) ** 2
    cumulative = np.cumsum(probs)
    indices = np.searchsorted(cumulative, u, side="right")
    # float rounding can leave cumulative[-1] a hair below 1; clamp to the
    # last outcome that carries probability
    last_supported = int(np.flatnonzero(probs > 0.0)[-1])
    return np.minimum(indices, last_supported)


def decode_joint_index(index: int, num_parties: int, num_outcomes: int) -> tuple[int, ...]:
    """Base-k digits of a joint index, party 0 first (most significant)."""
    digits = []
    for _ in range(num_parties):
        index, digit = divmod(index, num_outcomes)
        digits.append(digit)
    return tuple(reversed(digits))


def decode_joint_indices(indices, num_parties: int, num_outcomes: int) -> np.ndarray:
    """Vectorized ``decode_joint_index``; returns an (m, num_parties) int array."""
    remainder = np.asarray(indices, dtype=np.int64).copy()
    out = np.empty((remainder.size, num_parties), dtype=np.int64)
    for party in range(num_parties - 1, -1, -1):
        remainder, out[:, party] = np.divmod(remainder, num_outcomes)
    return out


def measure(state: StateVector, u: float) -> OutcomeProfile:
    """Joint computational-basis measurement driven by a single uniform draw.

    Every party's outcome comes from one joint sample, which is what carries
    the correlation of entangled states.  Deterministic given (state, u).
    """
    index = int(sample_joint_indices(state, np.array([u]))[0])
    outcomes = decode_joint_index(index, state.num_parties, state.num_outcomes)
    return OutcomeProfile(outcomes, state.num_outcomes)

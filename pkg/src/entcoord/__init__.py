"""Coordination-game simulator: correlated randomness mechanisms, games, and experiments."""

from .experiments import (
    CSV_COLUMNS,
    GAME_NAMES,
    GAME_REGISTRY,
    ExperimentConfig,
    ExperimentResult,
    GameSpec,
    SimulationTrace,
    analytic_expected_result,
    build_adversary,
    build_mechanism,
    compare_mechanisms,
    pair_state_from_coefficients,
    round_uniforms,
    run_experiment,
    simulate_rounds,
    write_results,
)
from .games import (
    EquilibriumCheck,
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
from .mechanisms import (
    ADVERSARY_KINDS,
    MECHANISM_KINDS,
    AdversaryModel,
    ChannelEvent,
    FullChoices,
    Mechanism,
    NoLeakage,
    RoundDraw,
    SeedStream,
    adversary_choice,
    best_response,
    draw_choices,
)
from .states import (
    NormalizationError,
    OutcomeProfile,
    ProbabilityTable,
    StateVector,
    bell_state,
    biased_pair_state,
    born_distribution,
    decode_joint_index,
    decode_joint_indices,
    ghz_state,
    measure,
    sample_joint_indices,
)

__version__ = "0.1.0"

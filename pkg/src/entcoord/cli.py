"""Command-line front end: run experiments, compare mechanisms, inspect games and states.

Every subcommand is a thin adapter over the library; no simulation or
analysis logic lives here.  Exit codes: 0 success, 1 runtime failure,
2 invalid usage or parameters.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .experiments import (
    GAME_NAMES,
    GAME_REGISTRY,
    RESULT_FORMATS,
    ExperimentConfig,
    build_mechanism,
    compare_mechanisms,
    pair_state_from_coefficients,
    run_experiment,
    write_results,
)
from .games import (
    expected_payoff,
    pure_nash_equilibria,
    uniform_profile,
    verify_mixed_equilibrium,
)
from .mechanisms import ADVERSARY_KINDS, MECHANISM_KINDS
from .states import bell_state, born_distribution, decode_joint_index

_RUN_DEFAULTS = {
    "game": None,  # required
    "mechanism": "entangled",
    "adversary": None,
    "rounds": 100000,
    "seed": 0,
    "out": None,
    "format": "csv",
    "coeff_a": None,
    "coeff_b": None,
    "jam_probability": 0.0,
    "crack_after_round": 0,
    "detection_penalty": 0.0,
    "parallel": False,
    "mechanisms": None,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entcoord",
        description=(
            "Simulate coordination games under different correlation mechanisms "
            "(independent, preshared, prng, private-coin, entangled) against "
            "adversaries (uniform, observer, seed-cracker, jammer)."
        ),
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="run one Monte Carlo experiment")
    _add_experiment_flags(run)
    run.add_argument(
        "--mechanism",
        choices=MECHANISM_KINDS,
        default=None,
        help="how the allies draw their choices (default: entangled)",
    )
    run.set_defaults(func=_cmd_run)

    compare = subparsers.add_parser(
        "compare", help="run one experiment per mechanism with a shared seed"
    )
    _add_experiment_flags(compare)
    compare.add_argument(
        "--mechanisms",
        nargs="+",
        choices=MECHANISM_KINDS,
        default=None,
        help="mechanisms to compare (one experiment each)",
    )
    compare.set_defaults(func=_cmd_compare)

    nash = subparsers.add_parser("nash", help="equilibrium analysis of a built-in game")
    nash.add_argument("--game", choices=GAME_NAMES, required=True)
    nash.set_defaults(func=_cmd_nash)

    state = subparsers.add_parser("state", help="print a state's amplitudes and probabilities")
    state.add_argument("--state", choices=("bell", "ghz", "biased"), required=True)
    state.add_argument("--parties", type=int, default=2)
    state.add_argument("--outcomes", type=int, default=2)
    state.add_argument("--coeff-a", type=float, default=None)
    state.add_argument("--coeff-b", type=float, default=None)
    state.set_defaults(func=_cmd_state)

    return parser


def _add_experiment_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", default=None, help="JSON file of defaults mirroring the flag names")
    sub.add_argument("--game", choices=GAME_NAMES, default=None)
    sub.add_argument(
        "--adversary",
        choices=ADVERSARY_KINDS,
        default=None,
        help="opponent policy; omit for games without an adversary "
        "(default for adversarial games: uniform)",
    )
    sub.add_argument("--rounds", type=int, default=None)
    sub.add_argument("--seed", type=int, default=None, help="64-bit master seed")
    sub.add_argument("--out", default=None, help="write results to this path")
    sub.add_argument("--format", choices=RESULT_FORMATS, default=None)
    sub.add_argument("--coeff-a", type=float, default=None, help="biased pair state coefficient a")
    sub.add_argument("--coeff-b", type=float, default=None, help="biased pair state coefficient b")
    sub.add_argument("--jam-probability", type=float, default=None)
    sub.add_argument("--crack-after-round", type=int, default=None)
    sub.add_argument("--detection-penalty", type=float, default=None)
    sub.add_argument("--parallel", action="store_true", default=None)


def _merged_settings(args: argparse.Namespace) -> dict:
    """Resolve flag > config-file > default for each experiment setting."""
    from_file = {}
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as handle:
            from_file = json.load(handle)
        unknown = set(from_file) - set(_RUN_DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config file keys: {sorted(unknown)}")
    settings = {}
    for key, default in _RUN_DEFAULTS.items():
        value = getattr(args, key, None)
        if value is None:
            value = from_file.get(key, default)
        settings[key] = value
    return settings


def _config_from_settings(settings: dict) -> ExperimentConfig:
    if settings["game"] is None:
        raise ValueError("a game is required (--game)")
    adversary = settings["adversary"]
    if adversary is None and GAME_REGISTRY[settings["game"]].num_adversaries > 0:
        adversary = "uniform"
    return ExperimentConfig(
        game=settings["game"],
        mechanism=settings["mechanism"],
        rounds=settings["rounds"],
        master_seed=settings["seed"],
        adversary=adversary,
        crack_after_round=settings["crack_after_round"],
        jam_probability=settings["jam_probability"],
        coeff_a=settings["coeff_a"],
        coeff_b=settings["coeff_b"],
        detection_penalty=settings["detection_penalty"],
        out_path=settings["out"],
        out_format=settings["format"],
    )


def _print_result(result) -> None:
    config = result.config
    spec = GAME_REGISTRY[config.game]
    adversary = config.adversary if config.adversary is not None else "none"
    print(
        f"game={config.game} mechanism={config.mechanism} adversary={adversary} "
        f"rounds={result.rounds} seed={config.master_seed}"
    )
    for index in range(len(result.mean_payoff)):
        role = "ally" if index < spec.num_allies else "adversary"
        print(
            f"  player {index} ({role}): mean payoff {result.mean_payoff[index]:.6f}, "
            f"stderr {result.std_err[index]:.6f}"
        )
    print(f"  coordination rate: {result.coordination_rate:.6f}")


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        settings = _merged_settings(args)
        config = _config_from_settings(settings)
        build_mechanism(config)  # surfaces bad state coefficients as usage errors
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    result = run_experiment(config, parallel=bool(settings["parallel"]))
    _print_result(result)
    if config.out_path is not None:
        write_results([result], config.out_format, config.out_path)
        print(f"wrote {config.out_path}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    try:
        settings = _merged_settings(args)
        if not settings["mechanisms"]:
            raise ValueError("at least one mechanism is required (--mechanisms)")
        config = _config_from_settings(settings)
        build_mechanism(config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    results = compare_mechanisms(config, settings["mechanisms"], parallel=bool(settings["parallel"]))
    for result in results:
        _print_result(result)
    if config.out_path is not None:
        write_results(results, config.out_format, config.out_path)
        print(f"wrote {config.out_path}")
    return 0


def _format_exact(value) -> str:
    if isinstance(value, Fraction) and value.denominator != 1:
        return f"{value} ({float(value):.6f})"
    return str(value)


def _cmd_nash(args: argparse.Namespace) -> int:
    table = GAME_REGISTRY[args.game].table
    equilibria = sorted(pure_nash_equilibria(table))
    print(f"game: {args.game}")
    if equilibria:
        rendered = ", ".join(
            "(" + ", ".join(table.label(i, c) for i, c in enumerate(joint)) + ")"
            for joint in equilibria
        )
        print(f"pure Nash equilibria: {rendered}")
    else:
        print("pure Nash equilibria: none")
    profile = uniform_profile(table)
    check = verify_mixed_equilibrium(table, profile, tol=Fraction(0))
    verdict = "is" if check.is_equilibrium else "is not"
    print(f"uniform mixed profile {verdict} an equilibrium (max deviation gain {check.max_gain})")
    values = ", ".join(_format_exact(v) for v in expected_payoff(table, profile))
    print(f"expected payoff under uniform profile: ({values})")
    return 0


def _cmd_state(args: argparse.Namespace) -> int:
    try:
        if args.state == "biased":
            if args.coeff_a is None or args.coeff_b is None:
                raise ValueError("biased state requires --coeff-a and --coeff-b")
            state = pair_state_from_coefficients(args.coeff_a, args.coeff_b)
        else:
            state = bell_state(args.parties, args.outcomes)
    except (ValueError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    probs = born_distribution(state).probabilities
    print(f"state: {args.state} ({state.num_parties} parties, {state.num_outcomes} outcomes)")
    for index, amplitude in enumerate(state.amplitudes):
        digits = decode_joint_index(index, state.num_parties, state.num_outcomes)
        basis = "".join(str(d) for d in digits)
        print(
            f"  |{basis}>  amplitude {amplitude.real:+.6f}{amplitude.imag:+.6f}j"
            f"  probability {probs[index]:.6f}"
        )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # runtime failures map to exit code 1
        print(f"error: {exc}", file=sys.stderr)
        return 1

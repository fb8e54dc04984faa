"""Command-line interface.

Exit codes: 0 success, 2 scenario/parameter validation error, 3 numeric
failure during an experiment.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from importlib import resources

import numpy as np

from .runner import (
    EXPERIMENTS,
    Scenario,
    ScenarioError,
    load_scenario,
    run_all,
    run_experiment,
)

_FIG_COMMANDS = {
    "fig-area-se": "area_vs_se",
    "fig-snr-area": "snr_vs_area",
    "fig-pathloss": "pathloss_vs_distance",
    "fig-beampattern": "beam_pattern",
    "fig-estimation": "estimation",
}


def default_scenario_path():
    """Path to the packaged default scenario."""
    return resources.files("rislink").joinpath("scenarios/default.json")


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out", help="output directory (default: scenario output_dir)")
    sub.add_argument("--seed", type=int, help="override the scenario seed")
    sub.add_argument(
        "--threads", type=int, default=1, help="worker threads for sweep points"
    )
    sub.add_argument(
        "--cosine-factors",
        action="store_true",
        help="enable incidence/departure cosine factors on element areas",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rislink",
        description="Link-level experiments for surface-aided radio links",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    run = commands.add_parser("run", help="run all experiments from a scenario file")
    run.add_argument("scenario", help="path to a scenario JSON file")
    _add_common_flags(run)
    for command, experiment in _FIG_COMMANDS.items():
        sub = commands.add_parser(
            command, help=f"run only the {experiment} experiment"
        )
        sub.add_argument(
            "--scenario",
            help="path to a scenario JSON file (default: packaged scenario)",
        )
        _add_common_flags(sub)
    return parser


def _load(args) -> Scenario:
    path = getattr(args, "scenario", None)
    if path is None:
        path = default_scenario_path()
    scenario = load_scenario(path)
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    if args.cosine_factors:
        scenario = dataclasses.replace(scenario, cosine_factors=True)
    return scenario


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = _load(args)
        out_dir = args.out if args.out is not None else scenario.output_dir
        if args.command == "run":
            outputs = run_all(scenario, out_dir, threads=args.threads)
            for name in EXPERIMENTS:
                print(f"{name}: {outputs[name]}")
        else:
            path = run_experiment(
                _FIG_COMMANDS[args.command], scenario, out_dir, threads=args.threads
            )
            print(path)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

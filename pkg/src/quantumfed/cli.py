"""Command-line entry point: ``quantumfed run`` and ``quantumfed preset``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import PRESETS, ConfigError, load_config, preset_configs
from .experiment import run_experiment
from .qnn import UnitarityError
from .tensor import NonHermitianError

OUT_ENV = "QUANTUMFED_OUT"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _default_out() -> str:
    return os.environ.get(OUT_ENV, "runs")


def _overrides(args) -> dict:
    fed = {
        k: v
        for k, v in {
            "rounds": args.rounds,
            "interval": args.interval,
            "eps": args.eps,
            "eta": args.eta,
            "mode": args.mode,
            "total_nodes": args.nodes,
            "participants": args.participants,
        }.items()
        if v is not None
    }
    out = {}
    if fed:
        out["federated"] = fed
    if args.seed is not None:
        out["seed"] = args.seed
    if args.noise is not None:
        out["data"] = {"noise_ratio": args.noise}
    if args.arch is not None:
        out["architecture"] = [int(w) for w in args.arch.split(",")]
    if args.name is not None:
        out["name"] = args.name
    return out


def _summary(result) -> str:
    if not result.reports:
        return f"{result.config.name}: 0 rounds -> {result.csv_path}"
    r = result.reports[-1]
    return (
        f"{result.config.name}: round {r.round} "
        f"train_fidelity={r.train_fidelity:.6f} train_mse={r.train_mse:.6f} "
        f"test_fidelity={r.test_fidelity:.6f} test_mse={r.test_mse:.6f} -> {result.csv_path}"
    )


def cmd_run(args) -> int:
    try:
        config = load_config(args.config, _overrides(args))
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    return _execute([config], args.out)


def cmd_preset(args) -> int:
    try:
        configs = preset_configs(args.name, seed=args.seed or 0)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    return _execute(configs, os.path.join(args.out, args.name))


def _execute(configs, out_dir) -> int:
    for config in configs:
        try:
            result = run_experiment(config, out_dir)
        except (UnitarityError, NonHermitianError, ArithmeticError) as err:
            print(f"error: numeric invariant violated in {config.name}: {err}", file=sys.stderr)
            return EXIT_NUMERIC
        print(_summary(result))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quantumfed", description="Federated training of dissipative QNNs.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log every round")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment from a YAML config")
    run.add_argument("--config", help="YAML config file (defaults are used for missing keys)")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", default=_default_out(), help=f"output directory (env {OUT_ENV}, default ./runs)")
    run.add_argument("--name")
    run.add_argument("--arch", help="comma-separated layer widths, e.g. 2,3,2")
    run.add_argument("--rounds", type=int)
    run.add_argument("--interval", type=int)
    run.add_argument("--eps", type=float)
    run.add_argument("--eta", type=float)
    run.add_argument("--mode", choices=["GD", "SGD"])
    run.add_argument("--nodes", type=int, help="total number of nodes")
    run.add_argument("--participants", type=int)
    run.add_argument("--noise", type=float, help="noisy fraction of the training data")
    run.set_defaults(func=cmd_run)

    preset = sub.add_parser("preset", help="run one of the sweep presets")
    preset.add_argument("name", choices=sorted(PRESETS))
    preset.add_argument("--seed", type=int)
    preset.add_argument("--out", default=_default_out())
    preset.set_defaults(func=cmd_preset)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

    python -m ntnopt --config scenario.json --mode evaluate --out-dir out/
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, ScenarioConfig, load_config, validate
from .runner import emit_outputs, run_evaluate, run_optimize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_RUNTIME = 4


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ntnopt", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="scenario JSON file (defaults apply when omitted)")
    p.add_argument("--mode", choices=("evaluate", "optimize"), default="evaluate")
    p.add_argument("--seed", type=int, help="override global.seed")
    p.add_argument("--out-dir", default="out")
    p.add_argument("--realizations", type=int, help="override global.realizations")
    p.add_argument("--trials", type=int, help="override optimizer.budget")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else ScenarioConfig()
        if args.seed is not None:
            cfg.global_.seed = args.seed
        if args.realizations is not None:
            cfg.global_.realizations = args.realizations
        if args.trials is not None:
            cfg.optimizer.budget = args.trials
        validate(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        outputs = run_optimize(cfg) if args.mode == "optimize" else run_evaluate(cfg)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        for path in emit_outputs(outputs, args.out_dir):
            print(path)
    except OSError as exc:
        print(f"cannot write outputs to {args.out_dir}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command line: lab run <config.json> [--out DIR] [--seed S] | lab report <DIR> | lab list."""
from __future__ import annotations

import argparse
import dataclasses
import sys

from ..errors import ConfigError, KinlabError, MissingArtifact

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="lab")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment from a JSON config")
    run.add_argument("config")
    run.add_argument("--out", default=None)
    run.add_argument("--seed", type=int, default=None)
    rep = sub.add_parser("report", help="summarise an artifact directory")
    rep.add_argument("dir")
    sub.add_parser("list", help="list experiments")
    return p


def main(argv=None) -> int:
    from .config import load_config
    from .experiments import EXPERIMENTS
    from .report import emit_report
    from .runner import run_experiment

    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "list":
        for name, exp in EXPERIMENTS.items():
            print(f"{name}: {exp.summary}")
        return EXIT_OK
    if args.command == "report":
        try:
            text, ok = emit_report(args.dir)
        except MissingArtifact as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(text)
        return EXIT_OK if ok else EXIT_FAIL
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed must be nonnegative")
            cfg = dataclasses.replace(cfg, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        folder, criteria = run_experiment(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KinlabError as exc:
        print(f"{type(exc).__name__} in {cfg.experiment}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text, ok = emit_report(folder)
    print(text)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

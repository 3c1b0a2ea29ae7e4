"""``prevopt`` command-line entry point."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from prevopt.cli.commands import COMMANDS
from prevopt.cli.config import load_config
from prevopt.errors import ConfigError, PrevoptError

EXIT_OK, EXIT_CHECK, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prevopt",
                                     description="Optimal prevention under exponential utility.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, help="experiment config file")
        p.add_argument("--seed", type=int, default=None, help="override [run] seed")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker threads for simulation")
        if name == "verify":
            p.add_argument("--inject-suboptimal", action="store_true",
                           help="label a deliberately wrong strategy as optimal")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("prevopt: error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None and args.seed < 0:
        print("prevopt: error: --seed must be nonnegative", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        seed = cfg.run.seed if args.seed is None else args.seed
        args.out.mkdir(parents=True, exist_ok=True)
        kwargs = {"inject_suboptimal": args.inject_suboptimal} if args.command == "verify" else {}
        code, summary = COMMANDS[args.command](cfg, args.out, seed, args.threads, **kwargs)
    except ConfigError as exc:
        print(f"prevopt: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PrevoptError as exc:
        print(f"prevopt: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK
    if args.command == "verify":
        for name, check in summary["checks"].items():
            print(f"{'PASS' if check['passed'] else 'FAIL'} {name}")
    else:
        print(json.dumps({k: v for k, v in summary.items() if not isinstance(v, (list, dict))},
                         default=str))
    return code


if __name__ == "__main__":
    sys.exit(main())

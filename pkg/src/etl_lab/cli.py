"""Command-line entry point: ``etl-lab run`` and ``etl-lab summarize``."""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .core import ConfigError, UsageError
from .harness import load_config, run_experiment, summarize

BUILTIN_CONFIGS = ("grid", "tower", "tower_recovery", "ipd")


def builtin_config_path(name: str) -> Path:
    return Path(str(resources.files("etl_lab") / "configs" / f"{name}.yaml"))


def _resolve_config(arg: str) -> Path:
    path = Path(arg)
    if not path.exists() and arg in BUILTIN_CONFIGS:
        return builtin_config_path(arg)
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="etl-lab", description="Trust-learning experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config and write its metrics CSV")
    run.add_argument("config", help=f"YAML config file, or a built-in name ({', '.join(BUILTIN_CONFIGS)})")
    run.add_argument("--out", metavar="DIR", help="directory for the CSV and metadata files")
    run.add_argument("--seeds", type=int, metavar="N", help="override n_seeds")
    run.add_argument("--episodes", type=int, metavar="N", help="override n_episodes")
    run.add_argument("--master-seed", type=int, metavar="S", help="override master_seed")

    summ = sub.add_parser("summarize", help="cross-seed means and rolling means of a metrics CSV")
    summ.add_argument("csv")
    summ.add_argument("--window", type=int, default=100, metavar="N", help="rolling window (default 100)")
    summ.add_argument("--out", metavar="FILE", help="write the summary here instead of stdout")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = load_config(_resolve_config(args.config)).with_overrides(
                n_seeds=args.seeds, n_episodes=args.episodes, master_seed=args.master_seed)
            if not 0 <= config.master_seed < 2**64:
                raise ConfigError("master_seed", "must be an integer in [0, 2**64)")
            path = run_experiment(config, args.out)
            print(path)
        else:
            text = summarize(args.csv, args.window).to_csv()
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
    except ConfigError as exc:
        print(f"etl-lab: invalid config: {exc}", file=sys.stderr)
        return 2
    except (UsageError, OSError) as exc:
        print(f"etl-lab: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

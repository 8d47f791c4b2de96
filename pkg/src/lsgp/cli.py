"""Command-line entry point.

    lsgp run --problem parity:3 --algo lsgp --pop 100 --gens 50 --runs 100 --seed 1 --out results/
    lsgp run --preset even-4 --algo gp --runs 50 --backend packed --out results/
    lsgp run --config exp.cfg --out results/
    lsgp summarize results/

Exit status is 0 on completion and 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .core import UsageError
from .harness import PRESETS, ExperimentConfig, read_records, run_experiment, summarize
from .problems import DataError

EXIT_CONFIG = 2

_INT_KEYS = {"pop", "gens", "runs", "seed", "liquid_size", "update_period", "max_height",
             "tournament_size", "elite_count"}
_FLOAT_KEYS = {"p_insert", "crossover_prob", "mutation_prob", "threshold"}
_BOOL_KEYS = {"ledger"}
_STR_KEYS = {"problem", "algo", "backend", "out", "preset"}


class ConfigError(ValueError):
    pass


def parse_config_file(path) -> dict:
    """Flat ``key=value`` lines; keys mirror the long flags (``-`` or ``_``)."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            values[key] = _convert(key, value, f"{path}:{lineno}")
    return values


def _convert(key: str, value: str, where: str):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _STR_KEYS:
            return value
        if key in _BOOL_KEYS:
            if value.lower() in ("1", "true", "yes", "on"):
                return True
            if value.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
    except ValueError:
        raise ConfigError(f"{where}: bad value {value!r} for {key}") from None
    raise ConfigError(f"{where}: unknown key {key!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lsgp", description="Liquid State Genetic Programming")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a batch of seeded runs")
    run.add_argument("--config", help="key=value file; explicit flags override it")
    run.add_argument("--preset", choices=sorted(PRESETS), help="named parity experiment (problem/pop/gens/runs)")
    run.add_argument("--problem", help="parity:K or regression:FILE")
    run.add_argument("--algo", choices=["lsgp", "gp"])
    run.add_argument("--pop", type=int)
    run.add_argument("--gens", type=int)
    run.add_argument("--runs", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--liquid-size", type=int)
    run.add_argument("--p-insert", type=float)
    run.add_argument("--update-period", type=int)
    run.add_argument("--backend", choices=["naive", "packed"])
    run.add_argument("--ledger", action="store_true", default=None)
    run.add_argument("--max-height", type=int)
    run.add_argument("--crossover-prob", type=float)
    run.add_argument("--mutation-prob", type=float)
    run.add_argument("--tournament-size", type=int)
    run.add_argument("--elite-count", type=int)
    run.add_argument("--threshold", type=float, help="success threshold on Q for regression")
    run.add_argument("--out", help="output directory")
    run.add_argument("--workers", type=int, help="worker processes (default: $LSGP_WORKERS or 1)")

    summ = sub.add_parser("summarize", help="recompute the summary from runs.jsonl")
    summ.add_argument("directory")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    if args.config:
        values.update(parse_config_file(args.config))
    for key in ExperimentConfig.__dataclass_fields__:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    preset = args.preset or values.pop("preset", None)
    values.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}")
        k, pop, gens, runs = PRESETS[preset]
        values.setdefault("problem", f"parity:{k}")
        values.setdefault("pop", pop)
        values.setdefault("gens", gens)
        values.setdefault("runs", runs)
    if "out" not in values:
        raise ConfigError("--out is required")
    return ExperimentConfig(**values)


def _cmd_run(args) -> int:
    config = config_from_args(args)
    summary, _ = run_experiment(config, workers=args.workers)
    print(f"{config.problem} {config.algo}: {summary.success_count}/{summary.runs} successful "
          f"(rate {summary.success_rate:.3f}), mean best Q {summary.mean_best_q:.4g}, "
          f"{summary.wall_time:.1f}s -> {config.out}")
    return 0


def _cmd_summarize(args) -> int:
    records = read_records(Path(args.directory) / "runs.jsonl")
    s = summarize(records)
    print(f"runs={s.runs} successes={s.success_count} rate={s.success_rate!r} "
          f"mean_success_gen={s.mean_success_gen} median_success_gen={s.median_success_gen} "
          f"mean_best_q={s.mean_best_q!r}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_summarize(args)
    except (ConfigError, UsageError, DataError, FileNotFoundError) as exc:
        print(f"lsgp: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"lsgp: I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

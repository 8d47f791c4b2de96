"""Batch experiment runner: many seeded runs, success-rate summary, files.

Run ``i`` of an experiment uses seed ``base_seed + i`` and owns its RNG,
liquid and population, so records do not depend on worker count or on the
order in which runs complete.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .core import (
    ARITHMETIC_SET,
    BOOLEAN_SET,
    Algebra,
    FitnessCaseTable,
    UnsupportedOperationError,
    UsageError,
    q_error,
)
from .engine import BACKENDS, GpParams, RunResult, reconstruct_expression, run_lsgp, run_standard_gp
from .liquid import DEFAULT_P_INSERT, DEFAULT_UPDATE_PERIOD, LiquidParams
from .problems import load_regression_csv, make_parity
from .tree import eval_tree

log = logging.getLogger(__name__)

WORKERS_ENV = "LSGP_WORKERS"
SEED_MODULUS = 2 ** 64
SUMMARY_HEADER = ["problem", "algo", "pop", "gens", "runs", "seed", "success_rate",
                  "mean_success_gen", "mean_best_q", "elapsed_s"]

# named parity experiments: (k, pop, generations, runs)
PRESETS = {
    "even-3": (3, 100, 50, 100),
    "even-4": (4, 1000, 50, 100),
    "even-5": (5, 5000, 50, 100),
    "even-6": (6, 5000, 500, 100),
    "even-7": (7, 5000, 1000, 100),
    "even-8": (8, 10000, 2000, 8),
}


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str = "parity:3"
    algo: str = "lsgp"
    pop: int = 100
    gens: int = 50
    runs: int = 100
    seed: int = 0
    liquid_size: Optional[int] = None
    p_insert: float = DEFAULT_P_INSERT
    update_period: int = DEFAULT_UPDATE_PERIOD
    backend: str = "naive"
    ledger: bool = False
    max_height: int = 12
    crossover_prob: float = 0.9
    mutation_prob: float = 0.1
    tournament_size: int = 2
    elite_count: int = 1
    threshold: Optional[float] = None
    out: Optional[str] = None

    def __post_init__(self):
        if self.runs < 1:
            raise UsageError("runs must be >= 1")
        if self.algo not in ("lsgp", "gp"):
            raise UsageError(f"unknown algorithm {self.algo!r}")
        if self.backend not in BACKENDS:
            raise UsageError(f"unknown backend {self.backend!r}")
        if not 0 <= self.seed < SEED_MODULUS:
            raise UsageError("seed must be a 64-bit unsigned integer")
        if self.ledger and self.algo != "lsgp":
            raise UsageError("the ledger records liquid items and needs --algo lsgp")
        kind, _, arg = self.problem.partition(":")
        if kind not in ("parity", "regression") or not arg:
            raise UsageError(f"problem must be parity:K or regression:FILE, got {self.problem!r}")
        if kind == "parity" and not arg.isdigit():
            raise UsageError(f"parity arity must be an integer, got {arg!r}")
        self.gp_params()

    def gp_params(self) -> GpParams:
        lo, hi = 2, min(6, self.max_height)
        return GpParams(
            pop_size=self.pop, generations=self.gens, max_height=self.max_height,
            crossover_prob=self.crossover_prob, mutation_prob=self.mutation_prob,
            tournament_size=self.tournament_size, elite_count=self.elite_count,
            init_depth_range=(min(lo, hi), hi),
        )

    def liquid_params(self, problem: FitnessCaseTable) -> LiquidParams:
        return LiquidParams(
            liquid_size=self.liquid_size if self.liquid_size is not None else 2 * problem.n,
            p_insert=self.p_insert, update_period=self.update_period,
        )

    def load_problem(self) -> FitnessCaseTable:
        kind, _, arg = self.problem.partition(":")
        if kind == "parity":
            return make_parity(int(arg))
        with open(arg, encoding="utf-8") as fh:
            first = fh.readline()
        # n inputs followed by one target column
        return load_regression_csv(arg, max(1, first.count(",")))

    def run_seed(self, index: int) -> int:
        return (self.seed + index) % SEED_MODULUS

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        """Hash of everything that influences the per-run records."""
        d = self.as_dict()
        d.pop("out")
        blob = json.dumps(d, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class ExperimentSummary:
    success_count: int
    runs: int
    success_rate: float
    mean_success_gen: Optional[float]
    median_success_gen: Optional[int]
    mean_best_q: float
    mean_tree_nodes: float
    wall_time: float = 0.0


def run_single(config: ExperimentConfig, index: int) -> tuple[dict, RunResult]:
    problem = config.load_problem()
    function_set = BOOLEAN_SET if problem.algebra is Algebra.BOOLEAN else ARITHMETIC_SET
    rng = random.Random(config.run_seed(index))
    if config.algo == "lsgp":
        result = run_lsgp(problem, config.gp_params(), config.liquid_params(problem), function_set,
                          rng, backend=config.backend, ledger=config.ledger,
                          success_threshold=config.threshold)
    else:
        result = run_standard_gp(problem, config.gp_params(), function_set, rng,
                                 backend=config.backend, success_threshold=config.threshold)
    if config.algo == "gp":
        names = [f"x{j + 1}" for j in range(problem.n)]
    else:
        names = [f"L{i}" for i in range(len(result.archive.liquid_snapshot))]
    record = {
        "run": index,
        "seed": config.run_seed(index),
        "success": result.success,
        "success_generation": result.success_generation,
        "best_q": result.best_q,
        "mean_tree_nodes": result.mean_tree_nodes,
        "generations_run": result.generations_run,
        "liquid_generation": result.archive.liquid_snapshot.generation,
        "best_tree": result.archive.tree.to_string(names),
    }
    if config.ledger:
        try:
            expr = reconstruct_expression(result.archive, result.ledger)
        except UnsupportedOperationError:
            record["reconstructed_q"] = None
        else:
            record["reconstructed_q"] = q_error(problem.targets, eval_tree(expr, problem.columns()))
    return record, result


def _run_record(args) -> tuple[dict, float]:
    config, index = args
    record, result = run_single(config, index)
    return record, result.elapsed


def summarize(records: Sequence[dict], wall_time: float = 0.0) -> ExperimentSummary:
    if not records:
        raise UsageError("cannot summarize an empty set of runs")
    runs = len(records)
    gens = sorted(r["success_generation"] for r in records if r["success"])
    successes = len(gens)
    return ExperimentSummary(
        success_count=successes,
        runs=runs,
        success_rate=successes / runs,
        mean_success_gen=sum(gens) / successes if gens else None,
        median_success_gen=gens[(successes - 1) // 2] if gens else None,
        mean_best_q=sum(r["best_q"] for r in records) / runs,
        mean_tree_nodes=sum(r["mean_tree_nodes"] for r in records) / runs,
        wall_time=wall_time,
    )


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def _prepare_output(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name in ("runs.jsonl", "timings.jsonl", "summary.csv", "config.json"):
        with open(out / name, "a", encoding="utf-8"):
            pass


def records_to_jsonl(records: Iterable[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def summary_row(config: ExperimentConfig, summary: ExperimentSummary) -> list:
    return [
        config.problem, config.algo, config.pop, config.gens, config.runs, config.seed,
        repr(summary.success_rate),
        "" if summary.mean_success_gen is None else repr(summary.mean_success_gen),
        repr(float(summary.mean_best_q)),
        f"{summary.wall_time:.3f}",
    ]


def summary_csv(config: ExperimentConfig, summary: ExperimentSummary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    w.writerow(summary_row(config, summary))
    return buf.getvalue()


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None
                   ) -> tuple[ExperimentSummary, list[dict]]:
    """Execute every run, then write outputs (when ``config.out`` is set).

    The output directory is checked for writability before the first run.
    """
    out = Path(config.out) if config.out else None
    if out is not None:
        _prepare_output(out)
    workers = worker_count() if workers is None else max(1, workers)
    config.load_problem()

    start = time.perf_counter()
    tasks = [(config, i) for i in range(config.runs)]
    if workers == 1:
        results = [_run_record(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_record, tasks))
    wall = time.perf_counter() - start

    records = [r for r, _ in results]
    summary = summarize(records, wall)
    log.info("%s %s: %d/%d successful", config.problem, config.algo,
             summary.success_count, summary.runs)
    if out is not None:
        (out / "runs.jsonl").write_text(records_to_jsonl(records), encoding="utf-8")
        (out / "timings.jsonl").write_text(
            "".join(json.dumps({"run": r["run"], "elapsed_ms": round(e * 1000, 3)}) + "\n"
                    for r, e in results), encoding="utf-8")
        (out / "summary.csv").write_text(summary_csv(config, summary), encoding="utf-8")
        meta = {"config_hash": config.digest(), "config": config.as_dict(),
                "summary": dataclasses.asdict(summary)}
        (out / "config.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                         encoding="utf-8")
    return summary, records


def read_records(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]

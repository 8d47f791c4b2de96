"""Generational tree GP over a fixed or liquid terminal set.

``run_lsgp`` reads its terminals from a liquid that is rebuilt every
``update_period`` generations; ``run_standard_gp`` reads the raw input
columns for the whole run. Both share the same selection, variation and
archiving code so the comparison between them is like for like.
"""

from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from .core import (
    Algebra,
    BestArchive,
    Combination,
    BOOLEAN_SET,
    FitnessCaseTable,
    FunctionSymbol,
    GpTree,
    Individual,
    Liquid,
    ProvenanceLedger,
    StaleFitnessError,
    UnsupportedOperationError,
    UsageError,
    q_error,
)
from .liquid import LiquidParams, init_liquid, step_liquid
from .packed import PackedScorer, pack
from .tree import FULL, GROW, crossover, eval_tree, mutation, random_tree

log = logging.getLogger(__name__)

NAIVE = "naive"
PACKED = "packed"
BACKENDS = (NAIVE, PACKED)

Scorer = Callable[[GpTree], Union[int, float]]
Observer = Callable[[int, list, Liquid], None]


@dataclass(frozen=True)
class GpParams:
    pop_size: int
    generations: int
    max_height: int = 12
    crossover_prob: float = 0.9
    mutation_prob: float = 0.1
    tournament_size: int = 2
    elite_count: int = 1
    init_depth_range: tuple[int, int] = (2, 6)

    def __post_init__(self):
        if self.pop_size < 1:
            raise UsageError("pop_size must be >= 1")
        if self.generations < 0:
            raise UsageError("generations must be >= 0")
        if self.max_height < 1:
            raise UsageError("max_height must be >= 1")
        if self.tournament_size < 1:
            raise UsageError("tournament_size must be >= 1")
        if not 0 <= self.elite_count < self.pop_size:
            raise UsageError("elite_count must lie in [0, pop_size)")
        for p in (self.crossover_prob, self.mutation_prob):
            if not 0.0 <= p <= 1.0:
                raise UsageError("probabilities must lie in [0, 1]")
        lo, hi = self.init_depth_range
        if not 1 <= lo <= hi <= self.max_height:
            raise UsageError("init_depth_range must satisfy 1 <= lo <= hi <= max_height")


@dataclass
class RunResult:
    success: bool
    success_generation: Optional[int]
    best_q: Union[int, float]
    archive: BestArchive
    mean_tree_nodes: float
    elapsed: float
    generations_run: int
    liquid: Liquid
    ledger: Optional[ProvenanceLedger] = field(default=None, repr=False)


def fitness(tree: GpTree, terminals, problem: FitnessCaseTable):
    return q_error(problem.targets, eval_tree(tree, terminals))


def make_scorer(problem: FitnessCaseTable, terminals, backend: str = NAIVE) -> Scorer:
    if backend == PACKED:
        if problem.algebra is not Algebra.BOOLEAN:
            raise UsageError("the packed backend only supports Boolean problems")
        return PackedScorer([pack(t) for t in terminals], pack(problem.targets))
    if backend != NAIVE:
        raise UsageError(f"unknown backend {backend!r}")
    terminals = tuple(terminals)
    targets = problem.targets

    def score(tree: GpTree):
        return q_error(targets, eval_tree(tree, terminals))

    return score


def init_population(function_set: Sequence[FunctionSymbol], terminal_count: int,
                    params: GpParams, rng: random.Random) -> list[GpTree]:
    """Ramped half-and-half: each tree draws a depth from the init range and
    full or grow with equal odds."""
    lo, hi = params.init_depth_range
    trees = []
    for _ in range(params.pop_size):
        depth = rng.randint(lo, hi)
        method = FULL if rng.random() < 0.5 else GROW
        trees.append(random_tree(function_set, terminal_count, method, depth, rng))
    return trees


def tournament_select(population: Sequence[Individual], tournament_size: int,
                      rng: random.Random) -> int:
    """Index of the lowest-Q contestant among ``tournament_size`` uniform
    draws; ties go to the earliest draw."""
    n = len(population)
    best = rng.randrange(n)
    best_q = population[best].q()
    for _ in range(tournament_size - 1):
        i = rng.randrange(n)
        q = population[i].q()
        if q < best_q:
            best, best_q = i, q
    return best


def _ensure_fresh(population: Sequence[Individual]) -> None:
    for ind in population:
        if ind.fitness is None:
            raise StaleFitnessError("population holds a stale fitness value")


def gp_generation(population: list[Individual], scorer: Scorer,
                  function_set: Sequence[FunctionSymbol], terminal_count: int,
                  params: GpParams, rng: random.Random, stamp: int = 0) -> list[Individual]:
    """One generational step with elitism, tournament selection, subtree
    crossover and subtree mutation. Offspring are scored before returning."""
    _ensure_fresh(population)
    order = sorted(range(len(population)), key=lambda i: population[i].fitness)
    nxt = [population[i].copy() for i in order[:params.elite_count]]
    while len(nxt) < params.pop_size:
        parent = population[tournament_select(population, params.tournament_size, rng)]
        tree = parent.tree
        if rng.random() < params.crossover_prob:
            donor = population[tournament_select(population, params.tournament_size, rng)]
            tree = crossover(tree, donor.tree, params.max_height, rng)
        if rng.random() < params.mutation_prob:
            tree = mutation(tree, function_set, terminal_count, params.max_height, rng)
        if tree is parent.tree:
            nxt.append(parent.copy())
        else:
            nxt.append(Individual(tree, scorer(tree), stamp))
    return nxt


def _best(population: Sequence[Individual]) -> Individual:
    best = population[0]
    for ind in population[1:]:
        if ind.fitness < best.fitness:
            best = ind
    return best


def _coerce_rng(rng) -> random.Random:
    if isinstance(rng, random.Random):
        return rng
    return random.Random(rng)


def _evolve(problem: FitnessCaseTable, gp_params: GpParams,
            liquid_params: Optional[LiquidParams], function_set: Sequence[FunctionSymbol],
            rng: random.Random, backend: str, use_ledger: bool,
            success_threshold: Optional[float], observer: Optional[Observer]) -> RunResult:
    start = time.perf_counter()
    function_set = tuple(function_set)
    for sym in function_set:
        if sym.algebra is not problem.algebra:
            raise UsageError(f"{sym.name} does not belong to the problem's algebra")

    ledger = ProvenanceLedger() if use_ledger else None
    if liquid_params is not None:
        liquid = init_liquid(problem, liquid_params, rng, ledger)
    else:
        liquid = Liquid(tuple(problem.columns()), 0, None)
    terminal_count = len(liquid)
    scorer = make_scorer(problem, liquid.items, backend)

    def solved(q) -> bool:
        return q == 0 or (success_threshold is not None and q <= success_threshold)

    trees = init_population(function_set, terminal_count, gp_params, rng)
    population = [Individual(t, scorer(t), liquid.generation) for t in trees]
    size_total = sum(len(ind.tree) for ind in population)
    size_count = len(population)

    best = _best(population)
    archive = BestArchive(best.tree, liquid, best.fitness, 0)
    success_generation = 0 if solved(archive.q) else None
    if observer is not None:
        observer(0, population, liquid)

    gen = 0
    while gen < gp_params.generations and success_generation is None:
        gen += 1
        population = gp_generation(population, scorer, function_set, terminal_count,
                                   gp_params, rng, liquid.generation)
        size_total += sum(len(ind.tree) for ind in population)
        size_count += len(population)
        best = _best(population)
        if best.fitness < archive.q:
            archive = BestArchive(best.tree, liquid, best.fitness, gen)
        if solved(archive.q):
            success_generation = gen
        elif liquid_params is not None and gen % liquid_params.update_period == 0:
            liquid = step_liquid(liquid, problem, liquid_params, function_set, rng, ledger)
            scorer = make_scorer(problem, liquid.items, backend)
            for ind in population:
                ind.mark_stale()
            for ind in population:
                ind.fitness = scorer(ind.tree)
                ind.stamp = liquid.generation
            best = _best(population)
            if best.fitness < archive.q:
                archive = BestArchive(best.tree, liquid, best.fitness, gen)
                if solved(archive.q):
                    success_generation = gen
        if observer is not None:
            observer(gen, population, liquid)

    elapsed = time.perf_counter() - start
    log.debug("run finished: gen=%d best_q=%s elapsed=%.3fs", gen, archive.q, elapsed)
    return RunResult(
        success=success_generation is not None,
        success_generation=success_generation,
        best_q=archive.q,
        archive=archive,
        mean_tree_nodes=size_total / size_count,
        elapsed=elapsed,
        generations_run=gen,
        liquid=liquid,
        ledger=ledger,
    )


def run_lsgp(problem: FitnessCaseTable, gp_params: GpParams,
             liquid_params: Optional[LiquidParams] = None,
             function_set: Sequence[FunctionSymbol] = BOOLEAN_SET,
             rng: Union[random.Random, int, None] = None, *,
             backend: str = NAIVE, ledger: bool = False,
             success_threshold: Optional[float] = None,
             observer: Optional[Observer] = None) -> RunResult:
    """Liquid State GP: trees over liquid items, with the liquid rebuilt
    after every ``update_period``-th generation and the whole population
    re-scored against it."""
    if liquid_params is None:
        liquid_params = LiquidParams.for_problem(problem)
    return _evolve(problem, gp_params, liquid_params, function_set, _coerce_rng(rng),
                   backend, ledger, success_threshold, observer)


def run_standard_gp(problem: FitnessCaseTable, gp_params: GpParams,
                    function_set: Sequence[FunctionSymbol] = BOOLEAN_SET,
                    rng: Union[random.Random, int, None] = None, *,
                    backend: str = NAIVE, success_threshold: Optional[float] = None,
                    observer: Optional[Observer] = None) -> RunResult:
    """Baseline GP whose terminals are the raw input columns."""
    return _evolve(problem, gp_params, None, function_set, _coerce_rng(rng),
                   backend, False, success_threshold, observer)


MAX_EXPRESSION_NODES = 10_000_000


def reconstruct_expression(archive: BestArchive, ledger: Optional[ProvenanceLedger],
                           max_nodes: int = MAX_EXPRESSION_NODES) -> GpTree:
    """Rewrite the archived tree over raw inputs by splicing in each leaf's
    recorded construction.

    Shared sub-expressions are expanded, so the result grows exponentially
    with the number of liquid updates; ``max_nodes`` bounds it.
    """
    ids = archive.liquid_snapshot.provenance_ids
    if ledger is None or ids is None:
        raise UnsupportedOperationError("reconstruction needs a run with the ledger enabled")
    # expanded size of every record, computed on the DAG without expanding it
    sizes: list[int] = []
    for rec in ledger.records:
        if isinstance(rec, Combination):
            sizes.append(1 + sum(sizes[p] for p in rec.parents))
        else:
            sizes.append(1)
    total = sum(1 if type(n) is not int else sizes[ids[n]] for n in archive.tree.nodes)
    if total > max_nodes:
        raise UnsupportedOperationError(
            f"expanded expression would have {total} nodes (limit {max_nodes})")
    cache: dict[int, tuple] = {}
    out: list = []
    for node in archive.tree.nodes:
        if type(node) is int:
            if node not in cache:
                cache[node] = ledger.expression(ids[node]).nodes
            out.extend(cache[node])
        else:
            out.append(node)
    return GpTree(tuple(out))

"""The liquid: a pool of behavior vectors that serves as the GP terminal set.

Items store only per-case values, never the expression that produced them.
New items come from recombination (elementwise application of a function
symbol to parent items) or insertion (a raw input column).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    BehaviorVector,
    FitnessCaseTable,
    FunctionSymbol,
    Liquid,
    ProvenanceLedger,
    UsageError,
    apply_symbol,
    behavior_vector,
)

DEFAULT_P_INSERT = 0.05
DEFAULT_UPDATE_PERIOD = 5


@dataclass(frozen=True)
class LiquidParams:
    liquid_size: int
    p_insert: float = DEFAULT_P_INSERT
    update_period: int = DEFAULT_UPDATE_PERIOD

    def __post_init__(self):
        if self.liquid_size < 1:
            raise UsageError("liquid_size must be >= 1")
        if not 0.0 <= self.p_insert <= 1.0:
            raise UsageError("p_insert must lie in [0, 1]")
        if self.update_period < 1:
            raise UsageError("update_period must be >= 1")

    @classmethod
    def for_problem(cls, problem: FitnessCaseTable, **kwargs) -> "LiquidParams":
        """Defaults: two liquid items per problem input."""
        kwargs.setdefault("liquid_size", 2 * problem.n)
        return cls(**kwargs)


def terminal_vector(problem: FitnessCaseTable, j: int) -> BehaviorVector:
    """Column ``j`` (0-based) of the input matrix."""
    if not 0 <= j < problem.n:
        raise UsageError(f"input index {j} outside [0, {problem.n})")
    return behavior_vector(problem.inputs[:, j], problem.algebra)


def init_liquid(problem: FitnessCaseTable, params: LiquidParams, rng: random.Random,
                ledger: Optional[ProvenanceLedger] = None) -> Liquid:
    """Liquid of single-terminal items.

    The first ``min(n, liquid_size)`` slots hold inputs 0..n-1 in order;
    remaining slots draw a terminal uniformly at random.
    """
    n = problem.n
    indices = list(range(min(n, params.liquid_size)))
    indices += [rng.randrange(n) for _ in range(params.liquid_size - len(indices))]
    items = tuple(terminal_vector(problem, j) for j in indices)
    ids = tuple(ledger.terminal(j) for j in indices) if ledger is not None else None
    return Liquid(items, 0, ids)


def recombine(liquid: Liquid, sym: FunctionSymbol, parents: Sequence[int],
              function_set: Optional[Sequence[FunctionSymbol]] = None) -> BehaviorVector:
    """Apply ``sym`` case by case to the selected parent items.

    When ``function_set`` is given, ``sym`` must belong to it: the liquid may
    only use the primitives available to the GP trees.
    """
    if function_set is not None and sym not in function_set:
        raise UsageError(f"{sym.name} is not in the configured function set")
    if len(parents) != sym.arity:
        raise UsageError(f"{sym.name} needs {sym.arity} parent(s), got {len(parents)}")
    for p in parents:
        if not 0 <= p < len(liquid):
            raise UsageError(f"parent index {p} outside the liquid")
    columns = [liquid.items[p].tolist() for p in parents]
    out = [apply_symbol(sym, args) for args in zip(*columns)]
    return behavior_vector(out, sym.algebra)


def insert_item(problem: FitnessCaseTable, rng: random.Random) -> BehaviorVector:
    """A uniformly chosen raw input column."""
    return terminal_vector(problem, rng.randrange(problem.n))


def step_liquid(liquid: Liquid, problem: FitnessCaseTable, params: LiquidParams,
                function_set: Sequence[FunctionSymbol], rng: random.Random,
                ledger: Optional[ProvenanceLedger] = None) -> Liquid:
    """Build the next liquid generation; every old item is replaced.

    Each new item is an insertion with probability ``p_insert``, otherwise a
    recombination under a uniformly chosen symbol whose parents are drawn
    uniformly, with replacement, from the old liquid.
    """
    if ledger is not None and liquid.provenance_ids is None:
        raise UsageError("ledger given but the liquid carries no provenance ids")
    items = []
    ids = []
    size = len(liquid)
    for _ in range(params.liquid_size):
        if rng.random() < params.p_insert:
            j = rng.randrange(problem.n)
            item = terminal_vector(problem, j)
            if ledger is not None:
                ids.append(ledger.terminal(j))
        else:
            sym = function_set[rng.randrange(len(function_set))]
            parents = [rng.randrange(size) for _ in range(sym.arity)]
            item = recombine(liquid, sym, parents, function_set)
            if ledger is not None:
                ids.append(ledger.combination(sym, [liquid.provenance_ids[p] for p in parents]))
        items.append(item)
    return Liquid(tuple(items), liquid.generation + 1, tuple(ids) if ledger is not None else None)


def liquid_matrix(liquid: Liquid) -> np.ndarray:
    """Items stacked as rows; handy for inspection."""
    return np.vstack(liquid.items)

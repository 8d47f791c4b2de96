"""Shared domain types: function symbols, fitness-case tables, liquids,
provenance records, trees and the absolute-error metric."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

__all__ = [
    "Algebra",
    "FunctionSymbol",
    "AND", "OR", "NAND", "NOR",
    "ADD", "SUB", "MUL", "DIV", "SIN",
    "BOOLEAN_SET", "ARITHMETIC_SET",
    "FitnessCaseTable",
    "BehaviorVector",
    "behavior_vector",
    "Liquid",
    "Terminal",
    "Combination",
    "ProvenanceLedger",
    "GpTree",
    "Individual",
    "BestArchive",
    "apply_symbol",
    "q_error",
    "UsageError",
    "StaleFitnessError",
    "UnsupportedOperationError",
]


class UsageError(ValueError):
    """An operation was called with arguments outside its contract."""


class StaleFitnessError(RuntimeError):
    """A fitness value computed against an outdated liquid was read."""


class UnsupportedOperationError(RuntimeError):
    """The requested operation needs a feature that was not enabled."""


class Algebra(enum.Enum):
    BOOLEAN = "boolean"
    ARITHMETIC = "arithmetic"


# -- symbol semantics -------------------------------------------------------
# Every function works elementwise on numpy arrays and on plain scalars.

def _and(a, b):
    return a & b


def _or(a, b):
    return a | b


def _nand(a, b):
    return 1 - (a & b)


def _nor(a, b):
    return 1 - (a | b)


def _add(a, b):
    return a + b


def _sub(a, b):
    return a - b


def _mul(a, b):
    return a * b


def _pdiv(a, b):
    if np.ndim(b) == 0:
        return 1.0 if b == 0 else a / b
    b = np.asarray(b, dtype=float)
    zero = b == 0
    with np.errstate(over="ignore", invalid="ignore"):
        return np.where(zero, 1.0, np.asarray(a, dtype=float) / np.where(zero, 1.0, b))


def _sin(a):
    if np.ndim(a) == 0:
        return float(np.sin(a))
    return np.sin(a)


@dataclass(frozen=True)
class FunctionSymbol:
    """A named primitive with a fixed arity and an elementwise implementation."""

    name: str
    arity: int
    algebra: Algebra
    func: Callable = field(compare=False, repr=False)

    def __call__(self, *args):
        return self.func(*args)

    def __reduce__(self):
        # unpickle to the shared module-level instance so identity checks hold
        if SYMBOLS_BY_NAME.get(self.name) == self:
            return (_symbol_by_name, (self.name,))
        return super().__reduce__()

    def __str__(self) -> str:
        return self.name


AND = FunctionSymbol("AND", 2, Algebra.BOOLEAN, _and)
OR = FunctionSymbol("OR", 2, Algebra.BOOLEAN, _or)
NAND = FunctionSymbol("NAND", 2, Algebra.BOOLEAN, _nand)
NOR = FunctionSymbol("NOR", 2, Algebra.BOOLEAN, _nor)

ADD = FunctionSymbol("+", 2, Algebra.ARITHMETIC, _add)
SUB = FunctionSymbol("-", 2, Algebra.ARITHMETIC, _sub)
MUL = FunctionSymbol("*", 2, Algebra.ARITHMETIC, _mul)
DIV = FunctionSymbol("/", 2, Algebra.ARITHMETIC, _pdiv)
SIN = FunctionSymbol("sin", 1, Algebra.ARITHMETIC, _sin)

BOOLEAN_SET: tuple[FunctionSymbol, ...] = (AND, OR, NAND, NOR)
ARITHMETIC_SET: tuple[FunctionSymbol, ...] = (ADD, SUB, MUL, DIV, SIN)

SYMBOLS_BY_NAME = {s.name: s for s in BOOLEAN_SET + ARITHMETIC_SET}


def _symbol_by_name(name: str) -> FunctionSymbol:
    return SYMBOLS_BY_NAME[name]

Value = Union[int, float]


def apply_symbol(sym: FunctionSymbol, args: Sequence[Value]) -> Value:
    """Apply ``sym`` to one scalar argument tuple.

    Boolean symbols only accept 0/1 values; protected division returns 1
    when the divisor is exactly zero.
    """
    if len(args) != sym.arity:
        raise UsageError(f"{sym.name} takes {sym.arity} argument(s), got {len(args)}")
    if sym.algebra is Algebra.BOOLEAN:
        vals = []
        for a in args:
            if a != 0 and a != 1:
                raise UsageError(f"{sym.name} applied to non-Boolean value {a!r}")
            vals.append(int(a))
        return sym.func(*vals)
    return sym.func(*(float(a) for a in args))


def q_error(targets, outputs) -> Value:
    """Sum of absolute per-case differences between targets and outputs.

    Integer (Boolean) inputs give an integer count, which for 0/1 vectors is
    the Hamming distance. Non-finite differences make the result ``inf``.
    """
    t = np.asarray(targets)
    o = np.asarray(outputs)
    if t.shape != o.shape:
        raise UsageError(f"length mismatch: {t.shape} vs {o.shape}")
    if t.dtype.kind in "biu" and o.dtype.kind in "biu":
        return int(np.abs(t.astype(np.int64) - o.astype(np.int64)).sum())
    with np.errstate(over="ignore", invalid="ignore"):
        q = float(np.abs(t.astype(float) - o.astype(float)).sum())
    return q if np.isfinite(q) else float("inf")


# -- problem data -----------------------------------------------------------

BehaviorVector = np.ndarray
"""A read-only 1-D array of per-fitness-case values."""


def behavior_vector(values, algebra: Algebra = Algebra.BOOLEAN) -> BehaviorVector:
    dtype = np.int8 if algebra is Algebra.BOOLEAN else np.float64
    v = np.array(values, dtype=dtype)
    if v.ndim != 1:
        raise UsageError("behavior vectors are one-dimensional")
    if algebra is Algebra.BOOLEAN and not np.isin(v, (0, 1)).all():
        raise UsageError("Boolean behavior vector with values outside {0, 1}")
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class FitnessCaseTable:
    """``m`` fitness cases over ``n`` inputs, plus one target per case."""

    inputs: np.ndarray
    targets: np.ndarray
    algebra: Algebra = Algebra.BOOLEAN

    def __post_init__(self):
        dtype = np.int8 if self.algebra is Algebra.BOOLEAN else np.float64
        inputs = np.array(self.inputs, dtype=dtype)
        targets = np.array(self.targets, dtype=dtype)
        if inputs.ndim != 2:
            raise UsageError("inputs must be an m x n matrix")
        m, n = inputs.shape
        if m < 1 or n < 1:
            raise UsageError("a fitness-case table needs m >= 1 and n >= 1")
        if targets.shape != (m,):
            raise UsageError(f"expected {m} targets, got shape {targets.shape}")
        if self.algebra is Algebra.BOOLEAN:
            if not (np.isin(inputs, (0, 1)).all() and np.isin(targets, (0, 1)).all()):
                raise UsageError("Boolean table holds values outside {0, 1}")
        inputs.setflags(write=False)
        targets.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    @property
    def m(self) -> int:
        return self.inputs.shape[0]

    @property
    def n(self) -> int:
        return self.inputs.shape[1]

    def columns(self) -> list[BehaviorVector]:
        cols = []
        for j in range(self.n):
            c = self.inputs[:, j].copy()
            c.setflags(write=False)
            cols.append(c)
        return cols


# -- liquid and provenance --------------------------------------------------

@dataclass(frozen=True)
class Liquid:
    items: tuple[BehaviorVector, ...]
    generation: int = 0
    provenance_ids: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if not self.items:
            raise UsageError("a liquid holds at least one item")
        m = len(self.items[0])
        if any(len(v) != m for v in self.items):
            raise UsageError("liquid items differ in length")
        if self.provenance_ids is not None and len(self.provenance_ids) != len(self.items):
            raise UsageError("one provenance id per liquid item is required")

    def __len__(self) -> int:
        return len(self.items)

    @property
    def m(self) -> int:
        return len(self.items[0])


@dataclass(frozen=True)
class Terminal:
    input_index: int


@dataclass(frozen=True)
class Combination:
    symbol: FunctionSymbol
    parents: tuple[int, ...]


class ProvenanceLedger:
    """Append-only record of how every liquid item was built.

    Records are stored in creation order, so a combination's parents always
    have smaller ids than the combination itself.
    """

    def __init__(self):
        self.records: list[Union[Terminal, Combination]] = []
        self._terminal_ids: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self.records)

    def terminal(self, j: int) -> int:
        if j not in self._terminal_ids:
            self.records.append(Terminal(j))
            self._terminal_ids[j] = len(self.records) - 1
        return self._terminal_ids[j]

    def combination(self, sym: FunctionSymbol, parents: Sequence[int]) -> int:
        parents = tuple(parents)
        new_id = len(self.records)
        if len(parents) != sym.arity or any(not 0 <= p < new_id for p in parents):
            raise UsageError(f"invalid parent ids {parents} for {sym.name}")
        self.records.append(Combination(sym, parents))
        return new_id

    def _reachable(self, record_id: int) -> list[int]:
        """Ids feeding into ``record_id``, in ascending (topological) order."""
        seen = {record_id}
        todo = [record_id]
        while todo:
            rec = self.records[todo.pop()]
            if isinstance(rec, Combination):
                for p in rec.parents:
                    if p not in seen:
                        seen.add(p)
                        todo.append(p)
        return sorted(seen)

    def replay(self, record_id: int, problem: FitnessCaseTable) -> BehaviorVector:
        """Recompute a record's behavior vector from the raw inputs."""
        cache: dict[int, np.ndarray] = {}
        for rid in self._reachable(record_id):
            rec = self.records[rid]
            if isinstance(rec, Terminal):
                cache[rid] = problem.inputs[:, rec.input_index]
            else:
                cache[rid] = rec.symbol(*(cache[p] for p in rec.parents))
        return behavior_vector(cache[record_id], problem.algebra)

    def replay_all(self, problem: FitnessCaseTable) -> list[BehaviorVector]:
        """Behavior vector of every record, in one pass over the ledger."""
        out: list[np.ndarray] = []
        for rec in self.records:
            if isinstance(rec, Terminal):
                out.append(problem.inputs[:, rec.input_index])
            else:
                out.append(rec.symbol(*(out[p] for p in rec.parents)))
        return [behavior_vector(v, problem.algebra) for v in out]

    def expression(self, record_id: int) -> "GpTree":
        """Expand a record into a tree whose leaves are raw input indices."""
        memo: dict[int, tuple] = {}
        for rid in self._reachable(record_id):
            rec = self.records[rid]
            if isinstance(rec, Terminal):
                memo[rid] = (rec.input_index,)
            else:
                nodes: list = [rec.symbol]
                for p in rec.parents:
                    nodes.extend(memo[p])
                memo[rid] = tuple(nodes)
        return GpTree(memo[record_id])

    def symbols_used(self) -> set[FunctionSymbol]:
        return {r.symbol for r in self.records if isinstance(r, Combination)}


# -- trees and individuals --------------------------------------------------

def _arity(node) -> int:
    return 0 if type(node) is int else node.arity


@dataclass(frozen=True)
class GpTree:
    """Expression tree stored as a prefix-ordered tuple.

    Internal nodes are :class:`FunctionSymbol` instances and leaves are
    integer terminal indices.
    """

    nodes: tuple

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def height(self) -> int:
        """Number of levels; a single leaf has height 1."""
        stack: list[int] = []
        for node in reversed(self.nodes):
            if type(node) is int:
                stack.append(1)
            else:
                k = node.arity
                h = max(stack[-k:])
                del stack[-k:]
                stack.append(h + 1)
        return stack[0]

    def leaves(self) -> list[int]:
        return [n for n in self.nodes if type(n) is int]

    def is_valid(self, terminal_count: Optional[int] = None,
                 max_height: Optional[int] = None) -> bool:
        need = 1
        for i, node in enumerate(self.nodes):
            if need == 0:
                return False
            if type(node) is int:
                if node < 0 or (terminal_count is not None and node >= terminal_count):
                    return False
            elif not isinstance(node, FunctionSymbol):
                return False
            need += _arity(node) - 1
        if need != 0:
            return False
        return max_height is None or self.height <= max_height

    def to_string(self, names: Optional[Sequence[str]] = None) -> str:
        out: list[str] = []
        for node in reversed(self.nodes):
            if type(node) is int:
                out.append(names[node] if names is not None else f"t{node}")
            else:
                args = [out.pop() for _ in range(node.arity)]
                out.append(f"{node.name}({', '.join(args)})")
        return out[0]

    def __str__(self) -> str:
        return self.to_string()


class Individual:
    """A tree plus its cached Q, stamped with the liquid generation it was
    computed against. ``fitness is None`` marks a stale cache."""

    __slots__ = ("tree", "fitness", "stamp")

    def __init__(self, tree: GpTree, fitness: Optional[Value] = None, stamp: int = 0):
        self.tree = tree
        self.fitness = fitness
        self.stamp = stamp

    def mark_stale(self) -> None:
        self.fitness = None

    def q(self, generation: Optional[int] = None) -> Value:
        if self.fitness is None or (generation is not None and generation != self.stamp):
            raise StaleFitnessError("fitness read before re-evaluation against the current liquid")
        return self.fitness

    def copy(self) -> "Individual":
        return Individual(self.tree, self.fitness, self.stamp)

    def __repr__(self) -> str:
        return f"Individual(q={self.fitness}, size={len(self.tree)})"


@dataclass(frozen=True)
class BestArchive:
    tree: GpTree
    liquid_snapshot: Liquid
    q: Value
    generation: int

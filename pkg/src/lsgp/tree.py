"""Tree construction, variation and naive (per-case array) evaluation.

Trees are prefix tuples (see :class:`lsgp.core.GpTree`), so a subtree is a
contiguous slice and crossover is slice surgery.
"""

from __future__ import annotations

import random
from typing import Sequence

import numpy as np

from .core import BehaviorVector, FunctionSymbol, GpTree, UsageError

GROW = "grow"
FULL = "full"
MUTATION_MAX_DEPTH = 4


def subtree_end(nodes: tuple, start: int) -> int:
    """Index one past the subtree rooted at ``start``."""
    need = 1
    i = start
    while need:
        node = nodes[i]
        need += (0 if type(node) is int else node.arity) - 1
        i += 1
    return i


def node_depth(nodes: tuple, index: int) -> int:
    """Level of ``nodes[index]``; the root is at level 1."""
    open_slots: list[int] = []
    for node in nodes[:index]:
        if type(node) is int:
            while open_slots:
                open_slots[-1] -= 1
                if open_slots[-1]:
                    break
                open_slots.pop()
        else:
            open_slots.append(node.arity)
    return len(open_slots) + 1


def _splice(nodes: tuple, index: int, insert: tuple, max_height: int):
    """``nodes`` with the subtree at ``index`` replaced by ``insert``, or None
    when that would exceed ``max_height``. Assumes ``nodes`` is already
    within the limit, so only the new branch needs checking."""
    if node_depth(nodes, index) - 1 + GpTree(insert).height > max_height:
        return None
    return GpTree(nodes[:index] + insert + nodes[subtree_end(nodes, index):])


def random_tree(function_set: Sequence[FunctionSymbol], terminal_count: int, method: str,
                depth: int, rng: random.Random) -> GpTree:
    """Random tree of height at most ``depth``.

    ``full`` puts every leaf at exactly ``depth``. ``grow`` picks among
    functions and terminals below the root, so branches may stop early; the
    root is always a function when ``depth > 1``.
    """
    if depth < 1:
        raise UsageError("depth must be >= 1")
    if terminal_count < 1:
        raise UsageError("terminal_count must be >= 1")
    if method not in (GROW, FULL):
        raise UsageError(f"unknown init method {method!r}")
    nf = len(function_set)
    nodes: list = []
    # each entry is the height budget left for a pending child slot
    pending = [depth]
    root = True
    while pending:
        budget = pending.pop()
        if budget == 1:
            nodes.append(rng.randrange(terminal_count))
        elif method == FULL or root:
            sym = function_set[rng.randrange(nf)]
            nodes.append(sym)
            pending.extend([budget - 1] * sym.arity)
        else:
            pick = rng.randrange(nf + terminal_count)
            if pick < nf:
                sym = function_set[pick]
                nodes.append(sym)
                pending.extend([budget - 1] * sym.arity)
            else:
                nodes.append(pick - nf)
        root = False
    return GpTree(tuple(nodes))


def eval_tree(tree: GpTree, terminals: Sequence[BehaviorVector]) -> np.ndarray:
    """Evaluate ``tree`` on every fitness case at once; leaf ``i`` reads
    ``terminals[i]``."""
    count = len(terminals)
    stack = []
    for node in reversed(tree.nodes):
        if type(node) is int:
            if not 0 <= node < count:
                raise UsageError(f"leaf index {node} outside {count} terminals")
            stack.append(terminals[node])
        elif node.arity == 2:
            a = stack.pop()
            b = stack.pop()
            stack.append(node.func(a, b))
        else:
            args = [stack.pop() for _ in range(node.arity)]
            stack.append(node.func(*args))
    return stack[0]


def crossover(a: GpTree, b: GpTree, max_height: int, rng: random.Random) -> GpTree:
    """Replace a uniformly chosen subtree of ``a`` with a uniformly chosen
    subtree of ``b``; an offspring taller than ``max_height`` is dropped in
    favour of ``a``."""
    an, bn = a.nodes, b.nodes
    i = rng.randrange(len(an))
    j = rng.randrange(len(bn))
    child = _splice(an, i, bn[j:subtree_end(bn, j)], max_height)
    return a if child is None else child


def mutation(t: GpTree, function_set: Sequence[FunctionSymbol], terminal_count: int,
             max_height: int, rng: random.Random) -> GpTree:
    """Replace a uniformly chosen subtree with a fresh grow tree of height at
    most four, under the same height rule as :func:`crossover`."""
    nodes = t.nodes
    i = rng.randrange(len(nodes))
    depth = rng.randint(1, MUTATION_MAX_DEPTH)
    fresh = random_tree(function_set, terminal_count, GROW, depth, rng)
    child = _splice(nodes, i, fresh.nodes, max_height)
    return t if child is None else child

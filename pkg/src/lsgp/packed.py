"""Bit-parallel Boolean evaluation.

A Boolean behavior vector is packed into ``w``-bit words, bit ``k`` of the
stream holding case ``k`` (least significant bit first). Each function symbol
then costs one bitwise operation per word instead of one per fitness case.
Bits past ``m`` in the last word are kept at zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import AND, NAND, NOR, OR, FunctionSymbol, GpTree, UsageError

WORD_BITS = 64


def _and(a, b, mask):
    return a & b


def _or(a, b, mask):
    return a | b


def _nand(a, b, mask):
    return mask ^ (a & b)


def _nor(a, b, mask):
    return mask ^ (a | b)


WORD_OPS = {AND: _and, OR: _or, NAND: _nand, NOR: _nor}


def word_masks(m: int, w: int) -> tuple[int, ...]:
    full = (1 << w) - 1
    count, tail = divmod(m, w)
    masks = [full] * count
    if tail:
        masks.append((1 << tail) - 1)
    return tuple(masks)


@dataclass(frozen=True)
class PackedVector:
    words: tuple[int, ...]
    m: int
    w: int = WORD_BITS

    def __post_init__(self):
        masks = word_masks(self.m, self.w)
        if len(self.words) != len(masks):
            raise UsageError(f"expected {len(masks)} words for m={self.m}, w={self.w}")
        if any(word & ~mask for word, mask in zip(self.words, masks)):
            raise UsageError("bits set beyond the valid range")

    @property
    def masks(self) -> tuple[int, ...]:
        return word_masks(self.m, self.w)

    def popcount(self) -> int:
        return sum(word.bit_count() for word in self.words)


def pack(v, w: int = WORD_BITS) -> PackedVector:
    arr = np.asarray(v)
    if arr.ndim != 1 or len(arr) == 0:
        raise UsageError("pack expects a non-empty 1-D vector")
    if not np.isin(arr, (0, 1)).all():
        raise UsageError("pack expects Boolean (0/1) entries")
    m = len(arr)
    words = []
    bits = arr.tolist()
    for start in range(0, m, w):
        word = 0
        for offset, bit in enumerate(bits[start:start + w]):
            if bit:
                word |= 1 << offset
        words.append(word)
    return PackedVector(tuple(words), m, w)


def unpack(p: PackedVector) -> np.ndarray:
    out = np.zeros(p.m, dtype=np.int8)
    for i, word in enumerate(p.words):
        base = i * p.w
        for offset in range(min(p.w, p.m - base)):
            out[base + offset] = (word >> offset) & 1
    return out


def _check_shapes(args: Sequence[PackedVector]) -> None:
    m, w = args[0].m, args[0].w
    for a in args[1:]:
        if a.m != m or a.w != w:
            raise UsageError(f"packed length mismatch: m={a.m}, w={a.w} vs m={m}, w={w}")


def packed_apply(sym: FunctionSymbol, args: Sequence[PackedVector]) -> PackedVector:
    if sym not in WORD_OPS:
        raise UsageError(f"{sym.name} has no packed form")
    if len(args) != sym.arity:
        raise UsageError(f"{sym.name} takes {sym.arity} argument(s), got {len(args)}")
    _check_shapes(args)
    op = WORD_OPS[sym]
    a, b = args
    words = tuple(op(x, y, mask) for x, y, mask in zip(a.words, b.words, a.masks))
    return PackedVector(words, a.m, a.w)


def eval_words(nodes: tuple, terminal_words: Sequence[int], mask: int) -> int:
    """Evaluate a prefix tree over one word slice of every terminal."""
    stack = []
    push = stack.append
    pop = stack.pop
    for node in reversed(nodes):
        if type(node) is int:
            push(terminal_words[node])
            continue
        a = pop()
        b = pop()
        if node is AND:
            push(a & b)
        elif node is OR:
            push(a | b)
        elif node is NAND:
            push(mask ^ (a & b))
        elif node is NOR:
            push(mask ^ (a | b))
        else:
            raise UsageError(f"{node} has no packed form")
    return stack[0]


def packed_eval(tree: GpTree, terminals: Sequence[PackedVector]) -> PackedVector:
    if not terminals:
        raise UsageError("no terminals")
    _check_shapes(terminals)
    count = len(terminals)
    for leaf in tree.leaves():
        if not 0 <= leaf < count:
            raise UsageError(f"leaf index {leaf} outside {count} terminals")
    first = terminals[0]
    words = []
    for i, mask in enumerate(first.masks):
        words.append(eval_words(tree.nodes, [t.words[i] for t in terminals], mask))
    return PackedVector(tuple(words), first.m, first.w)


def packed_fitness(tree: GpTree, terminals: Sequence[PackedVector], targets: PackedVector) -> int:
    """Hamming distance between the tree's output and ``targets``."""
    out = packed_eval(tree, terminals)
    _check_shapes([out, targets])
    return sum((x ^ y).bit_count() for x, y in zip(out.words, targets.words))


class PackedScorer:
    """Fitness function bound to one packed terminal set; the hot path used
    by the engine, skipping per-call validation."""

    def __init__(self, terminals: Sequence[PackedVector], targets: PackedVector):
        _check_shapes(list(terminals) + [targets])
        self.masks = targets.masks
        self.columns = [[t.words[i] for t in terminals] for i in range(len(self.masks))]
        self.targets = targets.words

    def __call__(self, tree: GpTree) -> int:
        nodes = tree.nodes
        q = 0
        for cols, mask, target in zip(self.columns, self.masks, self.targets):
            q += (eval_words(nodes, cols, mask) ^ target).bit_count()
        return q

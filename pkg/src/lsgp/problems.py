"""Problem instances: even-k-parity truth tables and regression tables."""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .core import Algebra, FitnessCaseTable, UsageError

MAX_PARITY_K = 20


class DataError(ValueError):
    """Fitness-case data is empty or holds unusable values."""


class ParseError(DataError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class ParitySpec:
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= MAX_PARITY_K:
            raise UsageError(f"parity arity must lie in [1, {MAX_PARITY_K}], got {self.k}")


def make_parity(spec: Union[ParitySpec, int]) -> FitnessCaseTable:
    """Even-k-parity truth table, rows in ascending binary order with x1 as
    the most significant bit. The target is 1 iff the row has an even number
    of ones."""
    if not isinstance(spec, ParitySpec):
        spec = ParitySpec(spec)
    k = spec.k
    rows = np.arange(2 ** k, dtype=np.int64)
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)
    inputs = ((rows[:, None] >> shifts) & 1).astype(np.int8)
    targets = (inputs.sum(axis=1) % 2 == 0).astype(np.int8)
    return FitnessCaseTable(inputs, targets, Algebra.BOOLEAN)


def quartic(x):
    return x ** 4 + x ** 3 + x ** 2 + x


def make_quartic(points: int, rng: random.Random) -> FitnessCaseTable:
    if points < 1:
        raise UsageError("points must be >= 1")
    xs = np.array([rng.uniform(-1.0, 1.0) for _ in range(points)])
    return FitnessCaseTable(xs[:, None], quartic(xs), Algebra.ARITHMETIC)


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_regression_csv(path: Union[str, Path], n: int) -> FitnessCaseTable:
    """Read ``n`` input columns followed by one target column per row.

    A first line whose leading field is not numeric is treated as a header.
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1 and not _is_number(row[0].strip()):
                continue
            if len(row) != n + 1:
                raise ParseError(lineno, f"expected {n + 1} fields, got {len(row)}")
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from None
            if not all(math.isfinite(v) for v in vals):
                raise DataError(f"row {lineno}: non-finite value")
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no fitness cases")
    data = np.array(rows, dtype=float)
    return FitnessCaseTable(data[:, :n], data[:, n], Algebra.ARITHMETIC)


def write_regression_csv(path: Union[str, Path], table: FitnessCaseTable) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(table.n)] + ["f"])
        for xs, f in zip(table.inputs, table.targets):
            w.writerow([repr(float(v)) for v in xs] + [repr(float(f))])

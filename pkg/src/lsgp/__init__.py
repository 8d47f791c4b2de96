"""Liquid State Genetic Programming: tree GP whose terminals are drawn from
an evolving pool of behavior vectors."""

from .core import (
    AND, ARITHMETIC_SET, BOOLEAN_SET, NAND, NOR, OR,
    Algebra, BestArchive, FitnessCaseTable, FunctionSymbol, GpTree, Individual,
    Liquid, ProvenanceLedger, apply_symbol, q_error,
)
from .engine import GpParams, RunResult, reconstruct_expression, run_lsgp, run_standard_gp
from .liquid import LiquidParams, init_liquid, step_liquid
from .problems import make_parity, make_quartic

__version__ = "0.1.0"

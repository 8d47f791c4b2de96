import random
from collections import Counter

import numpy as np
import pytest

import lsgp.liquid as liquid_mod
from lsgp.core import AND, BOOLEAN_SET, NAND, OR, Combination, Liquid, ProvenanceLedger, Terminal, UsageError
from lsgp.liquid import (
    LiquidParams, init_liquid, insert_item, recombine, step_liquid, terminal_vector,
)
from lsgp.problems import make_parity
from lsgp.core import FitnessCaseTable

from .conftest import FixedRandom

X1 = [0, 0, 0, 0, 1, 1, 1, 1]
X2 = [0, 0, 1, 1, 0, 0, 1, 1]
X3 = [0, 1, 0, 1, 0, 1, 0, 1]


def test_params_validation():
    with pytest.raises(UsageError):
        LiquidParams(0)
    with pytest.raises(UsageError):
        LiquidParams(4, p_insert=1.5)
    with pytest.raises(UsageError):
        LiquidParams(4, update_period=0)
    p = LiquidParams.for_problem(make_parity(3))
    assert (p.liquid_size, p.p_insert, p.update_period) == (6, 0.05, 5)


def test_terminal_vectors_match_initial_items(even3):
    assert terminal_vector(even3, 0).tolist() == X1
    assert terminal_vector(even3, 1).tolist() == X2
    assert terminal_vector(even3, 2).tolist() == X3
    with pytest.raises(UsageError):
        terminal_vector(even3, 3)


def test_terminal_vector_single_case():
    t = FitnessCaseTable(np.array([[1]]), np.array([0]))
    assert terminal_vector(t, 0).tolist() == [1]


def test_init_liquid_even3(even3, rng):
    liq = init_liquid(even3, LiquidParams(6), rng)
    assert liq.generation == 0 and len(liq) == 6
    assert [v.tolist() for v in liq.items[:3]] == [X1, X2, X3]
    for v in liq.items[3:]:
        assert v.tolist() in (X1, X2, X3)


def test_init_liquid_single_input(rng):
    t = make_parity(1)
    liq = init_liquid(t, LiquidParams(2), rng)
    assert [v.tolist() for v in liq.items] == [[0, 1], [0, 1]]


def test_init_liquid_even2(rng):
    liq = init_liquid(make_parity(2), LiquidParams(4), rng)
    assert [v.tolist() for v in liq.items[:2]] == [[0, 0, 1, 1], [0, 1, 0, 1]]


def test_init_liquid_smaller_than_inputs(even3, rng):
    liq = init_liquid(even3, LiquidParams(2), rng)
    assert [v.tolist() for v in liq.items] == [X1, X2]


def test_init_liquid_records_terminals(even3, rng):
    ledger = ProvenanceLedger()
    liq = init_liquid(even3, LiquidParams(6), rng, ledger)
    for item, rid in zip(liq.items, liq.provenance_ids):
        assert isinstance(ledger.records[rid], Terminal)
        assert np.array_equal(ledger.replay(rid, even3), item)


def _liquid(*vectors):
    return Liquid(tuple(np.array(v, dtype=np.int8) for v in vectors))


def test_recombine_examples():
    liq = _liquid(X1, X2)
    assert recombine(liq, AND, (0, 1)).tolist() == [0, 0, 0, 0, 0, 0, 1, 1]
    assert recombine(liq, NAND, (0, 1)).tolist() == [1, 1, 1, 1, 1, 1, 0, 0]
    assert recombine(liq, OR, (0, 0)).tolist() == X1


def test_recombine_leaves_parents_untouched():
    liq = _liquid(X1, X2)
    recombine(liq, AND, (0, 1))
    assert liq.items[0].tolist() == X1 and liq.items[1].tolist() == X2


def test_recombine_enforces_function_set():
    liq = _liquid(X1, X2)
    with pytest.raises(UsageError):
        recombine(liq, NAND, (0, 1), function_set=(AND, OR))
    with pytest.raises(UsageError):
        recombine(liq, AND, (0,))
    with pytest.raises(UsageError):
        recombine(liq, AND, (0, 2))


def test_insert_item_forced(even3):
    assert insert_item(even3, FixedRandom([1])).tolist() == X2


def test_insert_item_single_input():
    t = make_parity(1)
    r = random.Random(0)
    assert all(insert_item(t, r).tolist() == [0, 1] for _ in range(20))


def test_insert_item_is_uniform(even3):
    r = random.Random(99)
    counts = Counter(tuple(insert_item(even3, r).tolist()) for _ in range(10_000))
    for col in (X1, X2, X3):
        assert 0.30 <= counts[tuple(col)] / 10_000 <= 0.37


def test_step_all_insertions(even3, rng):
    params = LiquidParams(6, p_insert=1.0)
    liq = init_liquid(even3, params, rng)
    new = step_liquid(liq, even3, params, BOOLEAN_SET, rng)
    assert new.generation == 1
    assert all(v.tolist() in (X1, X2, X3) for v in new.items)


def test_step_or_of_identical_items(even3, rng):
    params = LiquidParams(5, p_insert=0.0)
    liq = _liquid(*([X2] * 5))
    new = step_liquid(liq, even3, params, (OR,), rng)
    assert all(v.tolist() == X2 for v in new.items)


def test_step_preserves_size(even3, rng):
    params = LiquidParams.for_problem(even3)
    liq = init_liquid(even3, params, rng)
    for g in range(1, 101):
        liq = step_liquid(liq, even3, params, BOOLEAN_SET, rng)
        assert len(liq) == 6 and liq.generation == g


def test_step_replaces_every_item(even3):
    """With a single symbol and no insertion, every new item is a
    recombination of old items, so none of the originals can survive
    unless recombination reproduces it."""
    params = LiquidParams(3, p_insert=0.0)
    liq = _liquid(X1, X2, X3)
    new = step_liquid(liq, even3, params, (AND,), random.Random(5))
    ones = [int(v.sum()) for v in new.items]
    # AND of two distinct columns has 2 ones; of a column with itself, 4
    assert all(c in (2, 4) for c in ones)


def test_step_with_ledger_requires_ids(even3, rng):
    params = LiquidParams(6)
    liq = init_liquid(even3, params, rng)
    with pytest.raises(UsageError):
        step_liquid(liq, even3, params, BOOLEAN_SET, rng, ProvenanceLedger())


def test_ledger_replay_and_closure_over_long_run(even3):
    rng = random.Random(2024)
    params = LiquidParams.for_problem(even3)
    function_set = (AND, NAND)
    ledger = ProvenanceLedger()
    liq = init_liquid(even3, params, rng, ledger)
    history = []
    for _ in range(1000):
        liq = step_liquid(liq, even3, params, function_set, rng, ledger)
        history.append(liq)
    replayed = ledger.replay_all(even3)
    for snapshot in history:
        for item, rid in zip(snapshot.items, snapshot.provenance_ids):
            assert np.array_equal(replayed[rid], item)
    for rid in liq.provenance_ids:
        assert np.array_equal(ledger.replay(rid, even3), replayed[rid])
    assert ledger.symbols_used() <= set(function_set)
    for rid, rec in enumerate(ledger.records):
        if isinstance(rec, Combination):
            assert all(p < rid for p in rec.parents)


def test_recombination_costs_m_symbol_applications(even3, monkeypatch):
    calls = []
    real = liquid_mod.apply_symbol

    def counting(sym, args):
        calls.append(sym)
        return real(sym, args)

    monkeypatch.setattr(liquid_mod, "apply_symbol", counting)
    liq = _liquid(X1, X2)
    recombine(liq, AND, (0, 1))
    assert len(calls) == even3.m

    for k in (2, 4, 6):
        t = make_parity(k)
        params = LiquidParams.for_problem(t)
        r = random.Random(k)
        base = init_liquid(t, params, r)
        calls.clear()
        insert_item(t, r)
        assert calls == []
        step = step_liquid(base, t, LiquidParams(params.liquid_size, p_insert=0.0), BOOLEAN_SET, r)
        assert len(calls) == t.m * len(step)

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from agency.boolfn import (
    MonotoneBoolFn, StructuredParams, all_monotone_functions, and_technology, build_nontrivial_pop_instance,
    build_structured, check_or_restriction, find_or_restriction, is_conjunction, is_constant, is_monotone,
    or_technology, restrict, structured_table,
)
from agency.solver_mixed import solve_mixed
from agency.solver_pure import solve_pure
from agency.technology import TechnologyError, classify_returns


def brute_structured(f, gamma, delta, a):
    """Sum over the bit patterns where f is true."""
    n = f.n
    total = 0.0
    for x in range(1 << n):
        if not f(x):
            continue
        w = 1.0
        for i in range(n):
            p = delta[i] if a >> i & 1 else gamma[i]
            w *= p if x >> i & 1 else 1 - p
        total += w
    return total


def test_and_or_examples():
    t = and_technology([0.1, 0.1], [0.9, 0.9])
    assert t.table[3] == pytest.approx(0.81) and t.table[0] == pytest.approx(0.01)
    t = or_technology([0.09, 0.09], [0.91, 0.91])
    assert np.allclose(t.table, [0.1719, 0.9181, 0.9181, 0.9919])


def test_majority_value():
    # x1, x2 exert (0.8 each), x3 shirks (0.2): P(at least two of three succeed)
    f = MonotoneBoolFn.majority(3)
    params = StructuredParams(f, (0.2,) * 3, (0.8,) * 3, (1.0,) * 3)
    t = build_structured(params)
    assert t.table[0b011] == pytest.approx(0.704, abs=1e-12)
    assert t.table[0b011] == pytest.approx(brute_structured(f, (0.2,) * 3, (0.8,) * 3, 0b011))


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_closed_forms(n, seed):
    rng = np.random.default_rng(seed)
    gamma = rng.uniform(0.01, 0.5, n)
    delta = gamma + rng.uniform(0.01, 0.49, n)
    ta = and_technology(gamma, delta)
    to = or_technology(gamma, delta)
    for a in range(1 << n):
        bits = np.array([a >> i & 1 for i in range(n)], bool)
        p = np.where(bits, delta, gamma)
        assert ta.table[a] == pytest.approx(np.prod(p), abs=1e-12)
        assert to.table[a] == pytest.approx(1 - np.prod(1 - p), abs=1e-12)
    if n >= 2:
        assert classify_returns(ta).irs
        assert classify_returns(to).drs


@given(st.integers(0, 2**32 - 1))
def test_structured_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    fs = list(all_monotone_functions(3))
    f = MonotoneBoolFn(3, fs[int(rng.integers(len(fs)))])
    gamma = rng.uniform(0.05, 0.4, 3)
    delta = gamma + 0.5
    tab = structured_table(f, gamma, delta)
    for a in range(8):
        assert tab[a] == pytest.approx(brute_structured(f, gamma, delta, a), abs=1e-12)


def test_formula_parsing():
    f = MonotoneBoolFn.from_formula("(x1 & x2) | x3")
    assert f.n == 3
    assert [f(x) for x in range(8)] == [0, 0, 0, 1, 1, 1, 1, 1]
    assert MonotoneBoolFn.from_formula("x1 | x2") == MonotoneBoolFn.OR(2)
    with pytest.raises(ValueError):
        MonotoneBoolFn.from_formula("x1 & (x2")


def test_predicates():
    assert is_conjunction(MonotoneBoolFn.from_formula("x1 & x3", 3)) == (0, 2)
    assert is_conjunction(MonotoneBoolFn.OR(2)) is None
    assert is_conjunction(MonotoneBoolFn(2, (1, 1, 1, 1))) == ()
    assert is_constant(MonotoneBoolFn(2, (0, 0, 0, 0)))
    # f(011)=1 but f(111)=0
    assert not is_monotone(np.array([0, 0, 0, 1, 0, 0, 0, 0], np.uint8))
    with pytest.raises(TechnologyError):
        build_structured(StructuredParams(MonotoneBoolFn(3, (0, 0, 0, 1, 0, 0, 0, 0)),
                                          (0.1,) * 3, (0.9,) * 3, (1.0,) * 3))


def test_all_monotone_counts():
    # Dedekind numbers
    assert [len(list(all_monotone_functions(n))) for n in range(5)] == [2, 3, 6, 20, 168]


def test_or_restriction_examples():
    assign, pair = find_or_restriction(MonotoneBoolFn.OR(2))
    assert assign == {} and pair == (0, 1)
    f = MonotoneBoolFn.from_formula("(x1 & x2) | x3")
    assign, pair = find_or_restriction(f)
    assert check_or_restriction(f, assign, pair)
    free, tab = restrict(f, assign)
    assert tuple(tab) == (0, 1, 1, 1)


def test_or_restriction_rejects_conjunction():
    with pytest.raises(ValueError):
        find_or_restriction(MonotoneBoolFn.AND(3))
    with pytest.raises(ValueError):
        find_or_restriction(MonotoneBoolFn(2, (0, 0, 0, 0)))


def test_or_restriction_exhaustive_small():
    count = 0
    for n in range(2, 4):
        for f in all_monotone_functions(n):
            if is_constant(f) or is_conjunction(f) is not None:
                continue
            assign, pair = find_or_restriction(f)
            assert check_or_restriction(f, assign, pair)
            count += 1
    assert count == 1 + 11


def test_params_invariants():
    with pytest.raises(TechnologyError):
        StructuredParams(MonotoneBoolFn.OR(2), (0.5, 0.5), (0.4, 0.4), (1.0, 1.0))
    with pytest.raises(TechnologyError):
        StructuredParams(MonotoneBoolFn.OR(2), (0.1,), (0.4,), (1.0,))


def test_embedding_of_or_is_second_example():
    p = build_nontrivial_pop_instance(MonotoneBoolFn.OR(2))
    assert p.gamma == (0.0001, 0.0001) and p.delta == (0.9, 0.9)


def ratio_at(params, v):
    tech = build_structured(params)
    return solve_mixed(tech, v).utility / solve_pure(tech, v).utility


def test_embedding_keeps_gap():
    f = MonotoneBoolFn.from_formula("(x1 & x2) | x3")
    assert ratio_at(build_nontrivial_pop_instance(f, 1e-3), 233) >= 1.02
    from agency.purity import pop
    p = build_nontrivial_pop_instance(MonotoneBoolFn.majority(3), 1e-3)
    assert pop(build_structured(p), with_bounds=False).pop > 1.01


def test_embedding_rejects_bad_eps():
    with pytest.raises(ValueError):
        build_nontrivial_pop_instance(MonotoneBoolFn.OR(2), 0.5)

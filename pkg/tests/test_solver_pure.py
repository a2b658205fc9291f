import numpy as np
import pytest
from hypothesis import given, strategies as st

from agency.random_tech import random_monotone
from agency.solver_pure import (
    payment_pure, payments_pure, pou, pure_envelope, solve_observable, solve_pure, transition_points,
    upper_envelope, utility_pure, verify_pure_nash,
)
from agency.technology import Technology, popcount


def brute_pure(tech, v):
    best = None
    for S in range(1 << tech.n):
        u = utility_pure(tech, S, v)
        if best is None or u > best[0] + 1e-12:
            best = (u, S)
    return best


def test_example_pure_contract(or_first):
    c = solve_pure(or_first, 348)
    assert c.mask == 3
    assert c.utility == pytest.approx(318.3, abs=0.1)
    assert c.payments[0] == pytest.approx(1 / (0.9919 - 0.9181))
    assert verify_pure_nash(or_first, c.mask, c.payments)


def test_second_example_single_agent(or_second):
    c = solve_pure(or_second, 233)
    assert popcount(c.mask) == 1
    assert c.utility == pytest.approx(208.7, abs=0.1)


def test_tiny_value_contracts_nobody(or_first):
    c = solve_pure(or_first, 0.01)
    assert c.mask == 0 and c.utility == pytest.approx(0.01 * 0.1719)


def test_payment_requires_membership(or_first):
    with pytest.raises(ValueError):
        payment_pure(or_first, 1, 1)


def test_one_agent_breakpoint():
    tech = Technology(1, (1.0,), (0.1, 0.9))
    assert transition_points(tech) == pytest.approx((1.40625,))
    val, where = pou(tech)
    assert where == pytest.approx(1.40625)
    assert val == pytest.approx(0.265625 / 0.140625)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1), st.floats(0.01, 1e4))
def test_solve_pure_matches_enumeration(n, seed, v):
    tech = random_monotone(n, np.random.default_rng(seed))
    c = solve_pure(tech, v)
    u, _ = brute_pure(tech, v)
    assert c.utility == pytest.approx(u, rel=1e-12, abs=1e-12)
    assert verify_pure_nash(tech, c.mask, c.payments)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_envelope_agrees_with_solver(n, seed):
    tech = random_monotone(n, np.random.default_rng(seed))
    env = pure_envelope(tech)
    assert all(np.diff(env.breakpoints) > 0)
    for v in np.geomspace(0.01, 1e4, 60):
        assert env.value_at(v) == pytest.approx(solve_pure(tech, v).utility, rel=1e-9, abs=1e-12)


def test_upper_envelope_small():
    env = upper_envelope([0.0, 1.0, 2.0], [1.0, 0.0, -3.0], labels=[0, 1, 3])
    assert env.pieces == (0, 1, 3)
    assert env.breakpoints == pytest.approx((1.0, 3.0))


def test_upper_envelope_drops_dominated_line():
    env = upper_envelope([0.0, 1.0, 2.0], [1.0, -5.0, -1.0], labels=[0, 1, 2])
    assert env.pieces == (0, 2)
    assert env.breakpoints == pytest.approx((1.0,))


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_pou_dominates_dense_sweep(n, seed):
    tech = random_monotone(n, np.random.default_rng(seed))
    val, _ = pou(tech)
    assert val >= 1.0
    vs = np.geomspace(1e-3, 1e5, 400)
    sweep = max(solve_observable(tech, v).utility / solve_pure(tech, v).utility for v in vs)
    assert sweep <= val + 1e-9


def test_observable_dominates_pure(or_first):
    for v in (0.5, 5, 50, 500):
        assert solve_observable(or_first, v).utility >= solve_pure(or_first, v).utility - 1e-12


def test_payments_pure_zero_outside(or_first):
    assert payments_pure(or_first, 1)[1] == 0.0

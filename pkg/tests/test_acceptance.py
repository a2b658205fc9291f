"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
"""
import csv
import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from agency import cli
from agency.boolfn import (
    MonotoneBoolFn, all_monotone_functions, and_technology, anonymous_or, check_or_restriction,
    find_or_restriction, is_conjunction, is_constant, or_technology,
)
from agency.network import BRIDGE, and_decomposition_check, brute_force_reliability, random_sp, reliability, to_graph
from agency.purity import or_ratio, pop
from agency.random_tech import random_monotone, random_profile, random_supermodular
from agency.solver_mixed import (
    SolveOptions, grid_oracle_mixed, indifference_payment, payment_bounds_check, payments_mixed,
    principal_utility_mixed, solve_mixed, strong_eq_check,
)
from agency.solver_pure import solve_observable, solve_pure, transition_points
from agency.technology import Technology, classify_returns, eval_mixed, popcount

RESULTS = []


def report(num, name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:>2}: {name}" + (f"  ({detail})" if detail else "")
    RESULTS.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    tr = request.config.pluginmanager.get_plugin("terminalreporter")
    if tr is not None and RESULTS:
        tr.write_line("")
        for line in sorted(RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            tr.write_line(line)


def test_c01_first_example():
    t0 = time.perf_counter()
    tech = anonymous_or(2, 0.09, 0.91)
    q = (0.92, 0.92)
    ev = eval_mixed(tech, q)
    pay = indifference_payment(tech, 0, q)
    u = principal_utility_mixed(tech, q, 348)
    pc = solve_pure(tech, 348)
    p = pop(tech).pop
    dt = time.perf_counter() - t0
    ok = (abs(ev - 0.976) <= 5e-4 and abs(pay - 7.837) <= 5e-3 and abs(u - 324.279) <= 0.05
          and pc.mask == 3 and abs(pc.utility - 318.3) <= 0.1 and p >= 1.0187 and dt < 1.0)
    report(1, "first numeric example", ok,
           f"t={ev:.4f} pay={pay:.4f} u={u:.3f} pure={pc.utility:.3f} pop={p:.5f} {dt:.2f}s")


def test_c02_second_example():
    t0 = time.perf_counter()
    tech = anonymous_or(2, 0.0001, 0.9)
    pc = solve_pure(tech, 233)
    u = principal_utility_mixed(tech, (0.92, 0.92), 233)
    m = solve_mixed(tech, 233)
    p = pop(tech).pop
    dt = time.perf_counter() - t0
    ok = (popcount(pc.mask) == 1 and abs(pc.utility - 208.7) <= 0.1 and abs(u - 213.569) <= 0.05
          and m.utility >= 213.5 and p >= 1.0233 and dt < 1.0)
    report(2, "second numeric example", ok,
           f"pure={pc.utility:.3f} u(0.92)={u:.3f} mixed={m.utility:.3f} pop={p:.5f} {dt:.2f}s")


def test_c03_irs_purity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst_pop, mixed_found = 0.0, 0
    for k in range(100):
        n = (2, 3, 4)[k % 3]
        tech = random_supermodular(n, rng)
        assert classify_returns(tech).irs
        bps = transition_points(tech)
        hi = 2 * max(bps) if bps else 100.0
        for v in np.concatenate([bps, rng.uniform(0.01, hi, 20 - len(bps))])[:20]:
            mixed_found += not solve_mixed(tech, v).degenerate
        worst_pop = max(worst_pop, abs(pop(tech, with_bounds=False).pop - 1.0))
    dt = time.perf_counter() - t0
    report(3, "increasing returns give pure optima", mixed_found == 0 and worst_pop <= 1e-6 and dt < 120,
           f"non-degenerate={mixed_found} max|pop-1|={worst_pop:.1e} {dt:.1f}s")


def test_c04_or_constant():
    t0 = time.perf_counter()
    worst = 0.0
    for n in (2, 3, 4):
        for g in np.arange(0.05, 0.451, 0.05):
            tech = anonymous_or(n, g, 1 - g)
            r = pop(tech, or_params=((g,) * n, (1 - g,) * n))
            assert not r.violations, r.violations
            worst = max(worst, r.pop)
    ds = np.linspace(0.5 + 1e-6, 1 - 1e-6, 200001)
    ratios = (1 - (1 - ds) ** 2) / (1 - (1 - ds) * ds)
    k = int(np.argmax(ratios))
    peak, at = ratios[k], ds[k]
    dt = time.perf_counter() - t0
    ok = worst <= 1.1548 and abs(peak - 1.154) <= 1e-3 and abs(at - (math.sqrt(3) - 1)) < 1e-3 and dt < 300
    assert abs(or_ratio(2, 1 - at, at) - peak) < 1e-12
    report(4, "anonymous OR with gamma = 1 - delta", ok,
           f"max pop={worst:.5f} peak ratio={peak:.5f} at delta={at:.5f} {dt:.1f}s")


def _two_agent_instances(rng, count):
    out = []
    for k in range(count):
        if k % 2:
            g = rng.uniform(0.0001, 0.3, 2)
            d = np.minimum(g + rng.uniform(0.3, 0.9, 2), 0.999)
            out.append(or_technology(g, d, costs=tuple(rng.uniform(0.5, 1.5, 2))))
        else:
            out.append(random_monotone(2, rng, identical_costs=bool(rng.random() < 0.5)))
    return out


ORACLE_V_MAX = 5000.0  # beyond this the 1e-4 grid's own error in utility exceeds 1e-4


def _oracle_values(tech, rng, count=5):
    """Values near transition points when they fall in range, else log-uniform in [1, ORACLE_V_MAX]."""
    bps = [v for v in transition_points(tech) if v <= ORACLE_V_MAX / 1.05]
    vs = [float(rng.choice(bps)) * rng.uniform(0.95, 1.05) if bps and k % 4 != 3
          else float(np.exp(rng.uniform(0, np.log(ORACLE_V_MAX)))) for k in range(count)]
    return vs


def test_c05_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    worst, mixed = 0.0, 0
    for tech in _two_agent_instances(rng, 50):
        for v in _oracle_values(tech, rng):
            m = solve_mixed(tech, v)
            o = grid_oracle_mixed(tech, v, 1e-4)
            worst = max(worst, abs(m.utility - o.utility))
            mixed += not m.degenerate
    dt = time.perf_counter() - t0
    report(5, "solver matches grid oracle", worst <= 1e-4 and dt < 600,
           f"max |gap|={worst:.2e}, {mixed}/250 non-degenerate optima, v <= {ORACLE_V_MAX:g}, {dt:.0f}s")


def test_c06_monotone_in_value():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    worst_mixed, worst_pure = 0.0, 0.0
    for k in range(20):
        tech = random_monotone(2 + k % 2, rng)
        bps = transition_points(tech)
        vs = np.sort(np.concatenate([np.geomspace(0.05, 3 * max(bps), 50 - len(bps)), bps]))
        prev = None
        prev_p = prev_o = None
        for v in vs:
            m = solve_mixed(tech, v)
            cur = (m.utility, m.success, m.expected_payment, m.total_payment)
            if prev is not None:
                worst_mixed = max(worst_mixed, max(a - b for a, b in zip(prev, cur)))
            prev = cur
            p, o = solve_pure(tech, v), solve_observable(tech, v)
            cp = (p.utility, p.success, p.expected_payment, p.total_payment)
            co = (o.utility, o.success, sum(tech.costs[i] for i in o.agents))
            if prev_p is not None:
                worst_pure = max(worst_pure, max(a - b for a, b in zip(prev_p, cp)),
                                 max(a - b for a, b in zip(prev_o, co)))
            prev_p, prev_o = cp, co
    ok = worst_mixed <= 1e-6 and worst_pure <= 1e-9
    report(6, "utility, success and payment grow with value", ok,
           f"max drop mixed={worst_mixed:.1e} pure/observable={worst_pure:.1e} {time.perf_counter() - t0:.1f}s")


def _nondegenerate_or_cases():
    cases = [(anonymous_or(2, 0.09, 0.91), 348.0), (anonymous_or(2, 0.0001, 0.9), 233.0)]
    for n, g in ((3, 0.05), (3, 0.1), (4, 0.05)):
        tech = anonymous_or(n, g, 1 - g)
        for v in transition_points(tech):
            if not solve_mixed(tech, v).degenerate:
                cases.append((tech, v))
    return cases


def test_c07_symmetric_mixing():
    opts = SolveOptions(symmetric=False, starts=32)
    worst, count = 0.0, 0
    for tech, v in _nondegenerate_or_cases():
        m = solve_mixed(tech, v, opts)
        if m.degenerate:
            continue
        sup = [x for x in m.profile.q if x > 0]
        worst = max(worst, max(sup) - min(sup))
        count += 1
    report(7, "anonymous OR mixes with one common probability", count >= 3 and worst <= 1e-3,
           f"{count} instances, max spread={worst:.1e}")


def test_c08_payment_brackets():
    rng = np.random.default_rng(8)
    margin = math.inf
    for k in range(100):
        n = 2 + k % 3
        tech = random_monotone(n, rng, identical_costs=False)
        q = random_profile(n, rng)
        for i in range(n):
            if q[i] > 0:
                lo, hi, actual = payment_bounds_check(tech, q, i)
                margin = min(margin, actual - lo, hi - actual)
    report(8, "mixed payments lie between pure payments", margin >= -1e-9, f"min margin={margin:.2e}")


def test_c09_not_strong():
    tech = anonymous_or(2, 0.09, 0.91)
    q = (0.92, 0.92)
    ex = strong_eq_check(tech, q, payments_mixed(tech, q))
    ok = not ex.is_strong and all(g > 0.01 and abs(g - 0.046) < 2e-3 for g in ex.gains)
    checked = 0
    for tech, v in _nondegenerate_or_cases():
        m = solve_mixed(tech, v)
        if len(m.profile.mixers) >= 2:
            verdict = strong_eq_check(tech, m.profile.q, m.payments)
            ok &= not verdict.is_strong and min(verdict.gains) > 0
            checked += 1
    ok &= checked >= 3
    report(9, "mixed optima are not strong equilibria", ok,
           f"example gains={ex.gains[0]:.4f},{ex.gains[1]:.4f}; {checked} other instances")


def test_c10_or_restriction():
    t0 = time.perf_counter()
    count = bad = 0
    for n in range(2, 5):
        for tab in all_monotone_functions(n):
            f = MonotoneBoolFn(n, tab)
            if is_constant(f) or is_conjunction(f) is not None:
                continue
            assign, pair = find_or_restriction(f)
            bad += not check_or_restriction(f, assign, pair)
            count += 1
    dt = time.perf_counter() - t0
    report(10, "every qualifying Boolean function restricts to OR", bad == 0 and count == 163 and dt < 60,
           f"{count} functions, {bad} failures, {dt:.2f}s")


def test_c11_network_reliability():
    rng = np.random.default_rng(11)
    mismatches = 0
    for _ in range(100):
        m = int(rng.integers(1, 13))
        net = random_sp(m, rng)
        probs = [Fraction(int(k), 1000) for k in rng.integers(0, 1001, m)]
        mismatches += reliability(net, probs) != brute_force_reliability(to_graph(net), probs)
    bridge = brute_force_reliability(BRIDGE, [Fraction(1, 2)] * 5)
    report(11, "series-parallel reliability equals enumeration", mismatches == 0 and bridge == Fraction(1, 2),
           f"{mismatches} mismatches, bridge={bridge}")


def test_c12_and_decomposition():
    one = Technology(1, (1.0,), (0.1, 0.9))
    cases = [
        (one, one, 10.0),
        (and_technology([0.2, 0.3], [0.8, 0.9]), and_technology([0.25], [0.85]), 50.0),
        (or_technology([0.09, 0.09], [0.91, 0.91]), one, 400.0),
    ]
    gaps = [and_decomposition_check(g, h, v).max_gap for g, h, v in cases]
    report(12, "AND composition splits into optimal blocks", max(gaps) <= 1e-3,
           "gaps=" + ",".join(f"{x:.1e}" for x in gaps))


def test_c13_phase_diagram(tmp_path):
    t0 = time.perf_counter()
    out = tmp_path / "diagram.csv"
    assert cli.main(["diagram", "--out", str(out)]) == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 49 * 200
    col = [r for r in rows if abs(float(r["gamma"]) - 0.09) < 1e-9]
    near = min(col, key=lambda r: abs(float(r["v"]) - 348))
    ok = near["region"] == "MIXED" and 0.90 <= float(near["mix_q"]) <= 0.94
    low = {r["region"] for r in rows if float(r["v"]) < 1.5}
    ok &= low == {"0"}
    drops = 0
    by_gamma = {}
    for r in rows:
        by_gamma.setdefault(r["gamma"], []).append(r)
    for rs in by_gamma.values():
        qs = [float(r["mix_q"]) for r in rs if r["region"] == "MIXED"]
        drops += sum(b < a - 1e-9 for a, b in zip(qs, qs[1:]))
    ok &= drops == 0
    report(13, "phase diagram shape", ok,
           f"cell (0.09, {float(near['v']):.1f}) {near['region']} q={near['mix_q']}; "
           f"low-v regions={sorted(low)}; q drops={drops}; {time.perf_counter() - t0:.0f}s")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))

"""Price of purity and the upper bounds it must respect.

The supremum over values of the mixed/pure utility ratio is attained at a
transition point of the pure envelope, so only those points are evaluated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .solver_mixed import MixedContract, SolveOptions, grid_oracle_mixed, solve_mixed
from .solver_pure import PureContract, payments_pure, pou, pure_envelope
from .technology import Technology, classify_returns, is_anonymous

BOUND_TOL = 1e-6
OR_HALF_CONSTANT = 2 * (3 - 2 * math.sqrt(3)) / (3 * (math.sqrt(3) - 2))  # = 2/sqrt(3)


@dataclass(frozen=True)
class Bound:
    name: str
    value: float
    applicable: bool = True
    satisfied: Optional[bool] = None


@dataclass(frozen=True)
class PurityReport:
    pop: float
    witness_v: float
    mixed_at_witness: Optional[MixedContract]
    pure_at_witness: Optional[PureContract]
    ratios: tuple[tuple[float, float], ...] = ()  # (transition point, ratio)
    bounds: tuple[Bound, ...] = ()
    oracle_pop: Optional[float] = None

    @property
    def violations(self) -> tuple[Bound, ...]:
        return tuple(b for b in self.bounds if b.applicable and b.satisfied is False)


def _pure_at_breakpoint(tech: Technology, k: int) -> PureContract:
    env = pure_envelope(tech)
    v = env.breakpoints[k]
    # both adjacent contracts are optimal here; report the larger set and the common value
    mask = env.pieces[k + 1]
    util = max(env.slopes[j] * v + env.intercepts[j] for j in (k, k + 1))
    return PureContract(mask, payments_pure(tech, mask), util, float(tech.table[mask]), v)


def pop(tech: Technology, opts: Optional[SolveOptions] = None, *,
        or_params: Optional[tuple[Sequence[float], Sequence[float]]] = None,
        oracle_resolution: Optional[float] = None, with_bounds: bool = True) -> PurityReport:
    env = pure_envelope(tech)
    ratios = []
    best = (-math.inf, 0.0, None, None)
    for k, v in enumerate(env.breakpoints):
        pc = _pure_at_breakpoint(tech, k)
        mc = solve_mixed(tech, v, opts)
        r = mc.utility / pc.utility
        ratios.append((v, r))
        if r > best[0]:
            best = (r, v, mc, pc)
    report = PurityReport(max(best[0], 1.0), best[1], best[2], best[3], tuple(ratios))
    if oracle_resolution is not None and ratios:
        orc = max(grid_oracle_mixed(tech, v, oracle_resolution).utility
                  / _pure_at_breakpoint(tech, k).utility
                  for k, v in enumerate(env.breakpoints))
        report = replace(report, oracle_pop=orc)
    if with_bounds:
        report = check_bounds(tech, report, or_params=or_params)
    return report


def pop_bound_general(tech: Technology) -> float:
    return float(tech.table[-1] / tech.table[0])


def pop_bound_n(tech: Technology) -> Optional[float]:
    if not tech.identical_costs:
        return None
    if is_anonymous(tech) is not None or classify_returns(tech).drs:
        return float(tech.n)
    return None


def pop_bound_two(tech: Technology) -> Optional[float]:
    if tech.n != 2 or not tech.identical_costs:
        return None
    return 1.5 if is_anonymous(tech) is not None else 2.0


def pop_bound_drs_single(tech: Technology) -> Optional[float]:
    """t(N) / t({i*}) for the agent with the largest solo success, under DRS."""
    if not tech.identical_costs or not classify_returns(tech).drs:
        return None
    best_single = max(tech.table[1 << i] for i in range(tech.n))
    return float(tech.table[-1] / best_single)


def or_ratio(n: int, gamma: float, delta: float) -> float:
    """t(1^n) / t(1, 0^(n-1)) for the anonymous OR technology."""
    return (1 - (1 - delta) ** n) / (1 - (1 - delta) * (1 - gamma) ** (n - 1))


def pop_bound_or(n: int, gammas: Sequence[float], deltas: Sequence[float]) -> list[Bound]:
    if len(gammas) != n or len(deltas) != n:
        raise ValueError(f"need {n} gamma and delta values")
    for g, d in zip(gammas, deltas):
        if not 0 <= g < d <= 1:
            raise ValueError(f"not OR parameters: need 0 <= gamma < delta <= 1, got {g}, {d}")
    fail_all = math.prod(1 - d for d in deltas)
    t_full = 1 - fail_all
    out = []
    if len(set(gammas)) == 1 and len(set(deltas)) == 1:
        g, d = gammas[0], deltas[0]
        out.append(Bound("OR anonymous (1-(1-d)^n)/d", (1 - (1 - d) ** n) / d))
        out.append(Bound("OR anonymous n-(n-1)d", n - (n - 1) * d))
        out.append(Bound("OR anonymous t_n/t_1", or_ratio(n, g, d)))
        if abs(g - (1 - d)) <= 1e-12 and g < 0.5:
            out.append(Bound("OR gamma=1-delta<1/2 constant", OR_HALF_CONSTANT))
    else:
        solo = [1 - (1 - deltas[i]) * math.prod(1 - gammas[j] for j in range(n) if j != i)
                for i in range(n)]
        out.append(Bound("OR best single agent t(N)/t({i*})", t_full / max(solo)))
    return out


def check_bounds(tech: Technology, report: PurityReport, *,
                 or_params: Optional[tuple[Sequence[float], Sequence[float]]] = None,
                 tol: float = BOUND_TOL) -> PurityReport:
    """Compare every applicable bound with the computed POP; violations are data."""
    p = report.pop
    bounds = [Bound("general t(N)/t(empty)", pop_bound_general(tech))]
    for name, fn in (("n (anonymous or DRS)", pop_bound_n),
                     ("two agents", pop_bound_two),
                     ("DRS best single agent t(N)/t({i*})", pop_bound_drs_single)):
        val = fn(tech)
        bounds.append(Bound(name, float("nan") if val is None else val, val is not None))
    if or_params is not None:
        bounds.extend(pop_bound_or(tech.n, *or_params))
    pou_val, _ = pou(tech)
    bounds.append(Bound("price of unaccountability", pou_val))
    bounds = [replace(b, satisfied=(p <= b.value + tol) if b.applicable else None) for b in bounds]
    return replace(report, bounds=tuple(bounds))

"""Mixed-strategy contracts: payments, equilibrium checks and optimal-contract search.

An agent mixing with probability in (0, 1) must be indifferent between effort
and shirking, which pins its success payment to ``c_i / Delta_i(q_-i)``.  The
principal's utility on a fixed support is smooth in the mixing probabilities,
so :func:`solve_mixed` enumerates supports and runs a batched multi-start
coordinate ascent on each one.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .solver_pure import PureContract, solve_pure
from .technology import (
    MixedProfile,
    Technology,
    agents_of,
    eval_mixed,
    is_anonymous,
    marginal,
    marginal_table,
    mask_of,
    popcount,
    profile_weights,
)

DEFAULT_SEED = 424242
MAX_MIXED_AGENTS = 10
SNAP_TOL = 1e-6
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class SolverCapError(ValueError):
    """The requested instance exceeds a solver's supported size."""


def default_seed() -> int:
    return int(os.environ.get("AGENCY_SEED", DEFAULT_SEED))


@dataclass(frozen=True)
class MixedContract:
    profile: MixedProfile
    payments: tuple[float, ...]
    utility: float
    success: float
    value: float

    @property
    def degenerate(self) -> bool:
        return self.profile.degenerate

    @property
    def total_payment(self) -> float:
        return sum(self.payments)

    @property
    def expected_payment(self) -> float:
        return self.success * self.total_payment


@dataclass(frozen=True)
class StrongEqVerdict:
    is_strong: bool
    coalition: tuple[int, ...] = ()
    deviation: tuple[float, ...] = ()
    gains: tuple[float, ...] = ()
    canonical: bool = False  # witness is the all-mixers-to-effort deviation
    scope: str = "canonical deviation + all pure coalition deviations"


@dataclass(frozen=True)
class SolveOptions:
    starts: int = 16
    seed: Optional[int] = None
    tol: float = 1e-10
    max_sweeps: int = 400
    grid: int = 17
    golden_iters: int = 40
    symmetric: bool = True
    prune: bool = True


def indifference_payment(tech: Technology, i: int, q) -> float:
    return tech.costs[i] / marginal(tech, i, q)


def payments_mixed(tech: Technology, q) -> tuple[float, ...]:
    """Minimal equilibrium payments: ``c_i / Delta_i(q_-i)`` on the support, 0 off it."""
    return tuple(indifference_payment(tech, i, q) if x > 0 else 0.0 for i, x in enumerate(q))


def agent_utility(tech: Technology, i: int, q, payment: float) -> float:
    return eval_mixed(tech, q) * payment - q[i] * tech.costs[i]


def principal_utility_mixed(tech: Technology, q, v: float) -> float:
    return eval_mixed(tech, q) * (v - sum(payments_mixed(tech, q)))


def contract_at(tech: Technology, q, v: float) -> MixedContract:
    prof = q if isinstance(q, MixedProfile) else MixedProfile(tuple(q))
    pay = payments_mixed(tech, prof.q)
    t = eval_mixed(tech, prof.q)
    return MixedContract(prof, pay, t * (v - sum(pay)), t, float(v))


def verify_mixed_nash(tech: Technology, q, payments: Sequence[float], tol: float = 1e-9) -> bool:
    for i, x in enumerate(q):
        gain = payments[i] * marginal(tech, i, q)
        c = tech.costs[i]
        if 0 < x < 1 and abs(gain - c) > tol:
            return False
        if x == 1 and gain < c - tol:
            return False
        if x == 0 and gain > c + tol:
            return False
    return True


# --- batched evaluation on a fixed support -------------------------------------

@lru_cache(maxsize=4096)
def _support_data(tech: Technology, mask: int):
    agents = agents_of(mask)
    sub = np.array([tech.table[mask_of(agents[j] for j in range(len(agents)) if b >> j & 1)]
                    for b in range(1 << len(agents))])
    sub_tech = Technology(len(agents), tuple(tech.costs[i] for i in agents), sub)
    return agents, sub, marginal_table(sub_tech), np.asarray(sub_tech.costs)


class _SupportObjective:
    """Principal utility on one support, vectorized over a batch of profiles."""

    def __init__(self, tech: Technology, mask: int, v: float):
        self.agents, self.table, self.D, self.c = _support_data(tech, mask)
        self.k = len(self.agents)
        self.v = v

    def __call__(self, Q: np.ndarray) -> np.ndarray:
        W = profile_weights(Q)
        t = W @ self.table
        d = W @ self.D
        with np.errstate(divide="ignore"):
            pay = np.where(Q > 0, self.c / d, 0.0).sum(axis=1)
        return t * (self.v - pay)

    def upper_bound(self) -> float:
        # payments are bracketed by pure marginals inside the support,
        # and t(q) <= t(S); exact bound on the whole support cell
        minpay = sum(self.c[j] / self.D[:, j].max() for j in range(self.k))
        return float(self.table[-1] * max(self.v - minpay, 0.0))


def _line_search(f, Q, U, i, grid, iters):
    """Maximize f along coordinate i for every row of Q; never worsens a row."""
    m = Q.shape[0]
    xs = np.linspace(0.0, 1.0, grid)
    G = np.repeat(Q, grid, axis=0)
    G[:, i] = np.tile(xs, m)
    UG = f(G).reshape(m, grid)
    j = UG.argmax(axis=1)
    h = 1.0 / (grid - 1)
    use_cur = U >= UG[np.arange(m), j]
    centre = np.where(use_cur, Q[:, i], xs[j])
    best_u = np.maximum(U, UG[np.arange(m), j])
    best_x = centre.copy()
    lo = np.clip(centre - h, 0.0, 1.0)
    hi = np.clip(centre + h, 0.0, 1.0)
    # golden section on [lo, hi]
    P = Q.copy()
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    P[:, i] = c
    fc = f(P)
    P[:, i] = d
    fd = f(P)
    for _ in range(iters):
        left = fc >= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        nc = np.where(left, b - GOLDEN * (b - a), d)
        nd = np.where(left, c, a + GOLDEN * (b - a))
        P[:, i] = np.where(left, nc, nd)
        fx = f(P)
        fc, fd = np.where(left, fx, fd), np.where(left, fc, fx)
        c, d = nc, nd
    xm = np.where(fc >= fd, c, d)
    fm = np.maximum(fc, fd)
    better = fm > best_u
    best_x = np.where(better, xm, best_x)
    best_u = np.where(better, fm, best_u)
    Q = Q.copy()
    Q[:, i] = best_x
    return Q, best_u


def _coordinate_ascent(f, Q, opts: SolveOptions):
    U = f(Q)
    k = Q.shape[1]
    for _ in range(opts.max_sweeps):
        before = U.copy()
        for i in range(k):
            Q, U = _line_search(f, Q, U, i, opts.grid, opts.golden_iters)
        if np.max(U - before) < opts.tol * (1.0 + np.max(np.abs(U))):
            break
    return Q, U


def _starts(k: int, count: int, seed: int) -> np.ndarray:
    m = 1 << max(0, int(np.ceil(np.log2(max(count, 1)))))
    pts = qmc.Sobol(d=k, scramble=True, seed=seed).random(m)[:count]
    return 1.0 - pts  # (0, 1]


def _symmetric_candidates(tech: Technology, v: float, opts: SolveOptions):
    """For anonymous technologies: k agents at one common probability, k = 2..n."""
    out = []
    for k in range(2, tech.n + 1):
        f = _SupportObjective(tech, (1 << k) - 1, v)
        g = lambda X, f=f, k=k: f(np.repeat(X, k, axis=1))  # noqa: E731
        Q = np.array([[0.5]])
        Q, U = _line_search(g, Q, g(Q), 0, 201, 60)
        q = [float(Q[0, 0])] * k + [0.0] * (tech.n - k)
        out.append((float(U[0]), q))
    return out


def _snap(q: np.ndarray) -> np.ndarray:
    near0 = q <= SNAP_TOL
    near1 = q >= 1.0 - SNAP_TOL
    if np.all(near0 | near1):
        return np.where(near1, 1.0, 0.0)
    return q


def _from_pure(tech: Technology, pc: PureContract) -> MixedContract:
    return MixedContract(MixedProfile.pure(tech.n, pc.mask), pc.payments, pc.utility,
                         pc.success, pc.value)


def solve_mixed(tech: Technology, v: float, opts: Optional[SolveOptions] = None) -> MixedContract:
    """Best mixed equilibrium contract found at value ``v``.

    Supports are visited in increasing bitmask order; a support is skipped when
    its exact utility bound cannot beat the incumbent (always true for
    super-modular technologies).  Never returns less than the pure optimum.
    """
    opts = opts or SolveOptions()
    if tech.n > MAX_MIXED_AGENTS:
        raise SolverCapError(f"mixed search supports n <= {MAX_MIXED_AGENTS}, got n={tech.n}")
    seed = default_seed() if opts.seed is None else opts.seed
    best = _from_pure(tech, solve_pure(tech, v))
    best_u = best.utility

    cands: list[tuple[float, list[float]]] = []
    if opts.symmetric and tech.n >= 2 and is_anonymous(tech) is not None:
        cands.extend(_symmetric_candidates(tech, v, opts))

    for mask in range(1, 1 << tech.n):
        if popcount(mask) < 2:
            continue  # one mixer alone: utility is linear in its probability
        f = _SupportObjective(tech, mask, v)
        if opts.prune and f.upper_bound() <= best_u + 1e-12 * (1.0 + abs(best_u)):
            continue
        Q0 = _starts(f.k, opts.starts, seed + mask)
        Q, U = _coordinate_ascent(f, Q0, opts)
        j = int(np.argmax(U))
        q = np.zeros(tech.n)
        q[list(f.agents)] = Q[j]
        cands.append((float(U[j]), list(q)))

    for u, q in cands:
        if u > best_u:
            snapped = _snap(np.asarray(q))
            c = contract_at(tech, snapped, v)
            if c.utility > best.utility:
                best = c
                best_u = c.utility
    return best


def grid_oracle_mixed(tech: Technology, v: float, resolution: float = 1e-3,
                      max_points: float = 2e9) -> MixedContract:
    """Exhaustive search over every support and every grid profile in {r, 2r, ..., 1}."""
    m = int(round(1.0 / resolution))
    if abs(m * resolution - 1.0) > 1e-9:
        raise ValueError("resolution must divide 1")
    if float(m) ** tech.n > max_points:
        raise SolverCapError(f"grid of {m}^{tech.n} profiles is too large")
    xs = np.arange(1, m + 1) / m
    best_u, best_q = tech.table[0] * v, np.zeros(tech.n)
    for mask in range(1, 1 << tech.n):
        f = _SupportObjective(tech, mask, v)
        u, q = _grid_support(f, xs)
        if u > best_u:
            best_u = u
            best_q = np.zeros(tech.n)
            best_q[list(f.agents)] = q
    return contract_at(tech, best_q, v)


def _grid_support(f: _SupportObjective, xs: np.ndarray):
    """Max of f over xs^k, by tensor contraction in chunks along the first axis."""
    k, m = f.k, len(xs)
    B = np.stack([1.0 - xs, xs], axis=1)
    idx = np.arange(1 << k)
    # Delta_j ignores agent j's own probability: contract over the other axes only
    own_free = []
    for j in range(k):
        keep = idx[(idx >> j & 1) == 0]
        own_free.append(f.D[keep, j])
    d0 = f.c[0] / _contract(own_free[0], B, B, k - 1) if k > 1 else f.c[0] / own_free[0][0]
    best_u, best_idx = -np.inf, None
    chunk = max(1, int(2e7 // max(1, m ** (k - 1))))
    for s in range(0, m, chunk):
        rows = B[s:s + chunk]
        t = _contract(f.table, rows, B, k)
        pay = np.broadcast_to(d0, t.shape[1:])[None, ...] if k > 1 else np.full(t.shape, d0)
        for j in range(1, k):
            d = _contract(own_free[j], rows, B, k - 1)
            pay = pay + np.expand_dims(f.c[j] / d, axis=j)
        u = t * (f.v - pay)
        flat = int(np.argmax(u))
        ui = u.reshape(-1)[flat]
        if ui > best_u:
            idx_ = np.unravel_index(flat, u.shape)
            best_u = float(ui)
            best_idx = (idx_[0] + s,) + tuple(idx_[1:])
    return best_u, xs[list(best_idx)]


def _contract(vec: np.ndarray, rows: np.ndarray, B: np.ndarray, k: int) -> np.ndarray:
    """Multilinear extension of ``vec`` on the grid rows x B x ... x B (agent 0 first)."""
    T = vec.reshape((2,) * k)  # C order: axis 0 is the highest agent
    T = np.transpose(T, tuple(range(k - 1, -1, -1)))  # axis j <-> agent j
    out = np.tensordot(rows, T, axes=([1], [0]))  # (r, 2, ..., 2)
    for _ in range(1, k):
        # contract the first remaining binary axis (always axis 1) and append grid axis
        out = np.tensordot(out, B, axes=([1], [1]))
    return out


def payment_bounds_check(tech: Technology, q, i: int, tol: float = 1e-9):
    """(lower, upper, actual) with lower/upper the extreme pure payments inside the support."""
    q = tuple(q)
    if not q[i] > 0:
        raise ValueError(f"agent {i} is outside the support")
    others = [j for j, x in enumerate(q) if x > 0 and j != i]
    bit = 1 << i
    pays = []
    for r in range(len(others) + 1):
        for T in itertools.combinations(others, r):
            tm = mask_of(T)
            pays.append(tech.costs[i] / (tech.table[tm | bit] - tech.table[tm]))
    lower, upper = min(pays), max(pays)
    actual = indifference_payment(tech, i, q)
    assert lower - tol <= actual <= upper + tol, (lower, actual, upper)
    return lower, upper, actual


def strong_eq_check(tech: Technology, q, payments: Sequence[float],
                    margin: float = 1e-12) -> StrongEqVerdict:
    q = tuple(float(x) for x in q)
    n = tech.n
    base = [agent_utility(tech, i, q, payments[i]) for i in range(n)]

    def gains_for(coal, dev):
        q2 = list(q)
        for i, x in zip(coal, dev):
            q2[i] = x
        return tuple(agent_utility(tech, i, q2, payments[i]) - base[i] for i in coal)

    mixers = tuple(i for i, x in enumerate(q) if 0 < x < 1)
    if len(mixers) >= 2:
        dev = (1.0,) * len(mixers)
        g = gains_for(mixers, dev)
        if min(g) > margin:
            return StrongEqVerdict(False, mixers, dev, g, canonical=True)
    if n > MAX_MIXED_AGENTS:
        raise SolverCapError(f"exhaustive coalition check supports n <= {MAX_MIXED_AGENTS}")
    for r in range(1, n + 1):
        for coal in itertools.combinations(range(n), r):
            for dev in itertools.product((0.0, 1.0), repeat=r):
                if all(q[i] == x for i, x in zip(coal, dev)):
                    continue
                g = gains_for(coal, dev)
                if min(g) > margin:
                    return StrongEqVerdict(False, coal, dev, g)
    return StrongEqVerdict(True)

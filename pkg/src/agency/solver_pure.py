"""Optimal pure contracts, value-axis envelopes and the price of unaccountability.

Every pure contract S has utility linear in the value v: hidden actions give
``t(S) * v - t(S) * P(S)`` with ``P(S) = sum_i c_i / (t(S) - t(S \\ {i}))``,
observable actions give ``t(S) * v - sum_{i in S} c_i``.  The optimum over
all 2^n contracts is therefore the upper envelope of 2^n lines.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .technology import Technology, agents_of, marginal_table, popcount

TIE_RTOL = 1e-12


@dataclass(frozen=True)
class PureContract:
    mask: int
    payments: tuple[float, ...]
    utility: float
    success: float
    value: float

    @property
    def agents(self) -> tuple[int, ...]:
        return agents_of(self.mask)

    @property
    def total_payment(self) -> float:
        return sum(self.payments)

    @property
    def expected_payment(self) -> float:
        return self.success * self.total_payment


@dataclass(frozen=True)
class ObservableContract:
    mask: int
    utility: float
    success: float
    value: float

    @property
    def agents(self) -> tuple[int, ...]:
        return agents_of(self.mask)


@dataclass(frozen=True)
class Envelope:
    """Upper envelope of contract lines over v > 0.

    ``pieces[k]`` is optimal on ``[breakpoints[k-1], breakpoints[k])`` with
    ``breakpoints[-1] = 0`` and ``breakpoints[len] = inf``.
    """
    breakpoints: tuple[float, ...]
    pieces: tuple[int, ...]
    slopes: tuple[float, ...]
    intercepts: tuple[float, ...]

    def index_at(self, v: float) -> int:
        return int(np.searchsorted(self.breakpoints, v, side="right"))

    def piece_at(self, v: float) -> int:
        return self.pieces[self.index_at(v)]

    def value_at(self, v: float) -> float:
        k = self.index_at(v)
        return self.slopes[k] * v + self.intercepts[k]


def _bits(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return ((idx[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)


@lru_cache(maxsize=256)
def _lines(tech: Technology) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(t(S), P(S), sum of costs in S) for every mask S."""
    B = _bits(tech.n)
    D = marginal_table(tech)
    c = np.asarray(tech.costs)
    with np.errstate(divide="ignore", invalid="ignore"):
        pay = np.where(B, c[None, :] / D, 0.0)
    P = pay.sum(axis=1)
    C = (B * c[None, :]).sum(axis=1)
    t = np.asarray(tech.table)
    for a in (P, C):
        a.setflags(write=False)
    return t, P, C


def payment_pure(tech: Technology, S, i: int) -> float:
    mask = S if isinstance(S, (int, np.integer)) else sum(1 << j for j in S)
    if not mask >> i & 1:
        raise ValueError(f"agent {i} is not in the contracted set")
    d = tech.table[mask] - tech.table[mask & ~(1 << i)]
    return float(tech.costs[i] / d)


def payments_pure(tech: Technology, mask: int) -> tuple[float, ...]:
    return tuple(payment_pure(tech, mask, i) if mask >> i & 1 else 0.0 for i in range(tech.n))


def utility_pure(tech: Technology, S, v: float) -> float:
    mask = S if isinstance(S, (int, np.integer)) else sum(1 << j for j in S)
    t, P, _ = _lines(tech)
    return float(t[mask] * (v - P[mask]))


def _pick(util: np.ndarray) -> int:
    """Argmax with ties (relative 1e-12) broken by smaller set, then smaller mask."""
    best = util.max()
    cand = np.flatnonzero(util >= best - TIE_RTOL * (1.0 + abs(best)))
    return int(min(cand, key=lambda m: (popcount(int(m)), int(m))))


def solve_pure(tech: Technology, v: float) -> PureContract:
    t, P, _ = _lines(tech)
    m = _pick(t * (v - P))
    return PureContract(m, payments_pure(tech, m), float(t[m] * (v - P[m])), float(t[m]), float(v))


def solve_observable(tech: Technology, v: float) -> ObservableContract:
    t, _, C = _lines(tech)
    m = _pick(t * v - C)
    return ObservableContract(m, float(t[m] * v - C[m]), float(t[m]), float(v))


def upper_envelope(slopes: Sequence[float], intercepts: Sequence[float],
                   labels: Optional[Sequence[int]] = None) -> Envelope:
    """Upper envelope over v > 0 of the lines ``slopes[k] * v + intercepts[k]``.

    Exactly coincident lines keep the label with fewer set bits, then the
    smaller label.
    """
    a = np.asarray(slopes, dtype=float)
    b = np.asarray(intercepts, dtype=float)
    lab = np.arange(len(a)) if labels is None else np.asarray(labels)
    pref = [(popcount(int(x)), int(x)) for x in lab]
    order = sorted(range(len(a)), key=lambda k: (a[k], -b[k], pref[k]))
    # one line per slope: highest intercept, tie rule on exact coincidence
    lines: list[int] = []
    for k in order:
        if lines and a[lines[-1]] == a[k]:
            continue
        lines.append(k)

    def cross(j, k):
        return (b[j] - b[k]) / (a[k] - a[j])

    hull: list[int] = []
    for k in lines:
        while len(hull) >= 2 and cross(hull[-2], k) <= cross(hull[-2], hull[-1]):
            hull.pop()
        hull.append(k)
    xs = [cross(hull[j], hull[j + 1]) for j in range(len(hull) - 1)]
    # clip to v > 0
    start = 0
    while start < len(xs) and xs[start] <= 0:
        start += 1
    hull = hull[start:]
    xs = xs[start:]
    return Envelope(tuple(float(x) for x in xs), tuple(int(lab[k]) for k in hull),
                    tuple(float(a[k]) for k in hull), tuple(float(b[k]) for k in hull))


@lru_cache(maxsize=256)
def pure_envelope(tech: Technology) -> Envelope:
    t, P, _ = _lines(tech)
    return upper_envelope(t, -t * P, np.arange(1 << tech.n))


def transition_points(tech: Technology) -> tuple[float, ...]:
    return pure_envelope(tech).breakpoints


@lru_cache(maxsize=256)
def observable_envelope(tech: Technology) -> Envelope:
    t, _, C = _lines(tech)
    return upper_envelope(t, -C, np.arange(1 << tech.n))


def pou(tech: Technology) -> tuple[float, float]:
    """Price of unaccountability and the value where it is attained.

    Both optima are piecewise linear in v, so their ratio is monotone between
    consecutive breakpoints of either envelope; the supremum sits on one.
    """
    hid = pure_envelope(tech)
    obs = observable_envelope(tech)
    pts = sorted(set(hid.breakpoints) | set(obs.breakpoints))
    best, where = 1.0, 0.0
    for v in pts:
        r = obs.value_at(v) / hid.value_at(v)
        if r > best:
            best, where = r, v
    return best, where


def verify_pure_nash(tech: Technology, S, payments: Sequence[float], tol: float = 1e-9) -> bool:
    mask = S if isinstance(S, (int, np.integer)) else sum(1 << j for j in S)
    for i in range(tech.n):
        bit = 1 << i
        gain = payments[i] * (tech.table[mask | bit] - tech.table[mask & ~bit])
        if mask & bit:
            if gain < tech.costs[i] - tol:
                return False
        elif gain > tech.costs[i] + tol:
            return False
    return True

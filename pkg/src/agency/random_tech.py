"""Random technology generators for experiments and property tests."""
from __future__ import annotations

import numpy as np

from .technology import Technology, popcount


def _costs(n, rng, identical):
    if identical:
        return (1.0,) * n
    return tuple(float(x) for x in rng.uniform(0.5, 2.0, n))


def random_monotone(n: int, rng: np.random.Generator, identical_costs: bool = True) -> Technology:
    """Strictly increasing table built layer by layer, then scaled into (0, 1)."""
    tab = np.zeros(1 << n)
    tab[0] = rng.uniform(0.01, 0.5)
    for b in sorted(range(1, 1 << n), key=popcount):
        below = max(tab[b & ~(1 << i)] for i in range(n) if b >> i & 1)
        tab[b] = below + rng.uniform(0.02, 1.0)
    tab *= rng.uniform(0.6, 0.999) / tab.max()
    return Technology(n, _costs(n, rng, identical_costs), tab)


def random_supermodular(n: int, rng: np.random.Generator, identical_costs: bool = True) -> Technology:
    """IRS technology: nonnegative Moebius coefficients, or a convex function of a weighted count."""
    idx = np.arange(1 << n)
    if rng.random() < 0.5:
        m = rng.exponential(1.0, 1 << n) * (rng.random(1 << n) < 0.7)
        m[0] = rng.uniform(0.01, 0.5)
        for i in range(n):
            m[1 << i] = rng.uniform(0.05, 1.0)
        tab = np.array([m[(idx & b) == idx].sum() for b in idx])
    else:
        w = rng.uniform(0.2, 1.0, n)
        s = ((idx[:, None] >> np.arange(n)) & 1) @ w
        p = rng.uniform(1.0, 4.0)
        tab = rng.uniform(0.01, 0.3) + s ** p
    tab = tab * rng.uniform(0.6, 0.999) / tab.max()
    return Technology(n, _costs(n, rng, identical_costs), tab)


def random_submodular(n: int, rng: np.random.Generator, identical_costs: bool = True) -> Technology:
    """DRS technology: a concave increasing function of a weighted count."""
    idx = np.arange(1 << n)
    w = rng.uniform(0.2, 1.0, n)
    s = ((idx[:, None] >> np.arange(n)) & 1) @ w
    p = rng.uniform(0.2, 0.9)
    tab = rng.uniform(0.01, 0.3) + s ** p
    tab = tab * rng.uniform(0.6, 0.999) / tab.max()
    return Technology(n, _costs(n, rng, identical_costs), tab)


def random_profile(n: int, rng: np.random.Generator, p_pure: float = 0.2) -> tuple[float, ...]:
    q = rng.uniform(0.0, 1.0, n)
    r = rng.random(n)
    q = np.where(r < p_pure / 2, 0.0, np.where(r < p_pure, 1.0, q))
    return tuple(float(x) for x in q)

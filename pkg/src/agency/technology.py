"""Technologies: success functions over binary effort profiles plus costs.

Profiles are bitmasks with agent 0 at the least-significant bit, so the
table entry ``table[b]`` is the success probability when exactly the agents
whose bits are set in ``b`` exert effort.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

MAX_AGENTS = 20
EQ_TOL = 1e-12
MONO_MARGIN = 1e-12


class TechnologyError(ValueError):
    """Raised when a technology cannot be constructed or fails validation."""


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_of(agents) -> int:
    m = 0
    for i in agents:
        m |= 1 << i
    return m


def agents_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@dataclass(frozen=True)
class Technology:
    n: int
    costs: tuple[float, ...]
    table: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise TechnologyError("need at least one agent")
        if n > MAX_AGENTS:
            raise TechnologyError(f"n={n} exceeds the supported maximum of {MAX_AGENTS} agents")
        costs = tuple(float(c) for c in self.costs)
        if len(costs) != n:
            raise TechnologyError(f"expected {n} costs, got {len(costs)}")
        table = np.array(self.table, dtype=float).reshape(-1)
        if table.shape[0] != 1 << n:
            raise TechnologyError(f"expected {1 << n} table entries, got {table.shape[0]}")
        table.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "table", table)

    def __eq__(self, other):
        if not isinstance(other, Technology):
            return NotImplemented
        return (self.n == other.n and self.costs == other.costs
                and np.array_equal(self.table, other.table))

    def __hash__(self):
        return hash((self.n, self.costs, self.table.tobytes()))

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def identical_costs(self) -> bool:
        return all(abs(c - self.costs[0]) <= EQ_TOL for c in self.costs)

    def t(self, mask: int) -> float:
        return eval_pure(self, mask)

    def with_costs(self, costs: Sequence[float]) -> "Technology":
        return Technology(self.n, tuple(costs), self.table)


@dataclass(frozen=True)
class MixedProfile:
    q: tuple[float, ...]

    def __post_init__(self):
        q = tuple(float(x) for x in self.q)
        for x in q:
            if not 0.0 <= x <= 1.0:
                raise ValueError(f"effort probability {x} outside [0, 1]")
        object.__setattr__(self, "q", q)

    def __len__(self):
        return len(self.q)

    def __iter__(self):
        return iter(self.q)

    def __getitem__(self, i):
        return self.q[i]

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.q) if x > 0)

    @property
    def mixers(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.q) if 0 < x < 1)

    @property
    def degenerate(self) -> bool:
        return all(x in (0.0, 1.0) for x in self.q)

    @classmethod
    def pure(cls, n: int, mask: int) -> "MixedProfile":
        return cls(tuple(1.0 if mask >> i & 1 else 0.0 for i in range(n)))

    def to_mask(self) -> int:
        if not self.degenerate:
            raise ValueError("profile is not degenerate")
        return mask_of(i for i, x in enumerate(self.q) if x == 1.0)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    problems: tuple[str, ...] = ()

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class ReturnsClass:
    label: str  # "IRS", "DRS", "BOTH" or "NEITHER"
    irs_witness: Optional[tuple] = None  # (i, a_mask, b_mask, gap) breaking IRS
    drs_witness: Optional[tuple] = None

    @property
    def irs(self) -> bool:
        return self.label in ("IRS", "BOTH")

    @property
    def drs(self) -> bool:
        return self.label in ("DRS", "BOTH")


def _fmt_profile(n: int, mask: int) -> str:
    return "(" + ",".join(str(mask >> i & 1) for i in range(n)) + ")"


def validate(tech: Technology, max_reports: int = 20) -> ValidationReport:
    problems = []
    for i, c in enumerate(tech.costs):
        if not c > 0:
            problems.append(f"non-positive cost c_{i + 1}={c}")
    n, tab = tech.n, tech.table
    for b in np.flatnonzero(~np.isfinite(tab))[:max_reports]:
        problems.append(f"non-finite success probability at {_fmt_profile(n, b)}")
    for b in np.flatnonzero(tab <= 0)[:max_reports]:
        problems.append(f"zero success probability at {_fmt_profile(n, b)}: t={tab[b]}")
    for b in np.flatnonzero(tab > 1)[:max_reports]:
        problems.append(f"success probability above 1 at {_fmt_profile(n, b)}: t={tab[b]}")
    idx = np.arange(1 << n)
    for i in range(n):
        bit = 1 << i
        lo = idx[(idx & bit) == 0]
        gaps = tab[lo | bit] - tab[lo]
        for k in np.flatnonzero(~(gaps > MONO_MARGIN))[:max_reports]:
            problems.append(
                f"non-strict monotonicity for agent {i + 1} at {_fmt_profile(n, lo[k])}: "
                f"t(1,a_-i)-t(0,a_-i)={gaps[k]:.3g}")
    return ValidationReport(not problems, tuple(problems))


def require_valid(tech: Technology) -> Technology:
    rep = validate(tech)
    if not rep.ok:
        raise TechnologyError("; ".join(rep.problems))
    return tech


def eval_pure(tech: Technology, mask: int) -> float:
    if not 0 <= mask < 1 << tech.n:
        raise IndexError(f"profile bitmask {mask} out of range for n={tech.n}")
    return float(tech.table[mask])


def profile_weights(q) -> np.ndarray:
    """Product-measure weights of all 2^n pure profiles under the mixed profile ``q``.

    Accepts a single profile (shape ``(n,)``) or a batch (shape ``(m, n)``).
    """
    q = np.asarray(q, dtype=float)
    single = q.ndim == 1
    Q = q[None, :] if single else q
    w = np.ones((Q.shape[0], 1))
    for j in range(Q.shape[1]):
        col = Q[:, j:j + 1]
        w = np.concatenate((w * (1.0 - col), w * col), axis=1)
    return w[0] if single else w


def eval_mixed(tech: Technology, q) -> float:
    q = np.asarray(q, dtype=float)
    if q.shape != (tech.n,):
        raise ValueError(f"profile has {q.shape} entries, technology has {tech.n} agents")
    if q.size and np.all((q == 0.0) | (q == 1.0)):
        return eval_pure(tech, mask_of(np.flatnonzero(q == 1.0)))
    return float(profile_weights(q) @ tech.table)


def marginal_table(tech: Technology) -> np.ndarray:
    """``D[b, i] = t(b | i) - t(b & ~i)``: pure marginal of agent i beside the others in b."""
    idx = np.arange(1 << tech.n)
    D = np.empty((1 << tech.n, tech.n))
    for i in range(tech.n):
        bit = 1 << i
        D[:, i] = tech.table[idx | bit] - tech.table[idx & ~bit]
    return D


def marginal(tech: Technology, i: int, q) -> float:
    """Delta_i(q_-i): the success gain from agent i working, others mixing per q."""
    q = np.array(q, dtype=float)
    q[i] = 1.0
    hi = eval_mixed(tech, q)
    q[i] = 0.0
    lo = eval_mixed(tech, q)
    return hi - lo


def pure_marginal(tech: Technology, i: int, others_mask: int) -> float:
    bit = 1 << i
    return float(tech.table[others_mask | bit] - tech.table[others_mask & ~bit])


def classify_returns(tech: Technology) -> ReturnsClass:
    """Compare each agent's marginal at every pair of comparable profiles a <= b.

    All comparable pairs are checked for n <= 12; above that only covering
    pairs (b = a + one agent), which is equivalent for the exact inequality.
    """
    n = tech.n
    idx = np.arange(1 << n)
    D = marginal_table(tech)
    irs_w = drs_w = None
    for i in range(n):
        bit = 1 << i
        rest = idx[(idx & bit) == 0]
        d = D[rest, i]
        for pos, a in enumerate(rest):
            if n <= 12:
                sup = ((rest & a) == a) & (rest != a)
            else:
                x = rest ^ a
                sup = (x != 0) & ((x & (x - 1)) == 0) & ((rest & a) == a)
            if not sup.any():
                continue
            gaps = d[sup] - d[pos]
            bs = rest[sup]
            if irs_w is None and gaps.min() < -EQ_TOL:
                k = int(np.argmin(gaps))
                irs_w = (i, int(a), int(bs[k]), float(gaps[k]))
            if drs_w is None and gaps.max() > EQ_TOL:
                k = int(np.argmax(gaps))
                drs_w = (i, int(a), int(bs[k]), float(gaps[k]))
            if irs_w is not None and drs_w is not None:
                return ReturnsClass("NEITHER", irs_w, drs_w)
    if irs_w is None and drs_w is None:
        label = "BOTH"
    elif irs_w is None:
        label = "IRS"
    else:
        label = "DRS"
    return ReturnsClass(label, irs_w, drs_w)


def is_anonymous(tech: Technology) -> Optional[tuple[float, ...]]:
    """Count-indexed success list (t_0, ..., t_n) when t depends only on the effort count."""
    if not tech.identical_costs:
        return None
    levels: list[Optional[float]] = [None] * (tech.n + 1)
    for b in range(1 << tech.n):
        k = popcount(b)
        x = float(tech.table[b])
        if levels[k] is None:
            levels[k] = x
        elif abs(levels[k] - x) > EQ_TOL:
            return None
    return tuple(levels)  # type: ignore[arg-type]


def restrict_support(tech: Technology, agents: Sequence[int]) -> Technology:
    """Technology over ``agents`` only, with every other agent pinned to shirking."""
    agents = tuple(sorted(agents))
    if not agents:
        raise ValueError("support must be nonempty")
    k = len(agents)
    table = np.empty(1 << k)
    for b in range(1 << k):
        table[b] = tech.table[mask_of(agents[j] for j in range(k) if b >> j & 1)]
    sub = Technology(k, tuple(tech.costs[i] for i in agents), table)
    return require_valid(sub)


def from_anonymous(levels: Sequence[float], costs) -> Technology:
    n = len(levels) - 1
    if np.isscalar(costs):
        costs = (float(costs),) * n
    table = [levels[popcount(b)] for b in range(1 << n)]
    return Technology(n, tuple(costs), table)


def from_function(n: int, costs, fn) -> Technology:
    """Tabulate ``fn(mask)`` over all profiles."""
    if np.isscalar(costs):
        costs = (float(costs),) * n
    return Technology(n, tuple(costs), [fn(b) for b in range(1 << n)])

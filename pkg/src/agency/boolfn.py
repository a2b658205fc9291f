"""Monotone Boolean functions and the structured technologies built on them.

Agent i's own task succeeds with probability ``delta_i`` when it works and
``gamma_i`` when it shirks; the project succeeds when ``f`` of the task
outcomes is 1.  Truth tables are bitmask indexed like technology tables.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .technology import Technology, TechnologyError, agents_of, require_valid

MAX_ARITY = 20
MAX_STRUCTURED = 16


@dataclass(frozen=True)
class MonotoneBoolFn:
    """Truth table of f; monotonicity is checked by ``is_monotone`` and at build time."""
    n: int
    truth: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_ARITY:
            raise ValueError(f"arity {self.n} outside 1..{MAX_ARITY}")
        truth = tuple(int(bool(x)) for x in self.truth)
        if len(truth) != 1 << self.n:
            raise ValueError(f"truth table needs {1 << self.n} entries, got {len(truth)}")
        object.__setattr__(self, "truth", truth)

    @classmethod
    def from_formula(cls, text: str, n: Optional[int] = None) -> "MonotoneBoolFn":
        node = parse_formula(text)
        arity = max(_variables(node), default=0) + 1
        n = arity if n is None else n
        if arity > n:
            raise ValueError(f"formula uses x{arity} but arity is {n}")
        idx = np.arange(1 << n)
        return cls(n, tuple(int(x) for x in _eval_node(node, idx)))

    @classmethod
    def AND(cls, n: int) -> "MonotoneBoolFn":
        full = (1 << n) - 1
        return cls(n, tuple(int(b == full) for b in range(1 << n)))

    @classmethod
    def OR(cls, n: int) -> "MonotoneBoolFn":
        return cls(n, tuple(int(b != 0) for b in range(1 << n)))

    @classmethod
    def majority(cls, n: int) -> "MonotoneBoolFn":
        return cls(n, tuple(int(2 * bin(b).count("1") > n) for b in range(1 << n)))

    def __call__(self, mask: int) -> int:
        return self.truth[mask]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.truth, dtype=np.int8)


# --- formula parsing ------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(x)(\d+)|([&|()01]))")


def _tokenize(text: str):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"unexpected character {text[pos:].strip()[:1]!r} at offset {pos} in formula")
        if m.group(1):
            k = int(m.group(2))
            if k < 1:
                raise ValueError("variables are numbered from x1")
            out.append(("var", k - 1))
        else:
            out.append((m.group(3), None))
        pos = m.end()
    return out


def parse_formula(text: str):
    """Parse ``x1 & (x2 | x3)`` into nested tuples ``('|'|'&', [children])`` / ``('var', i)``."""
    toks = _tokenize(text)
    pos = 0

    def peek():
        return toks[pos][0] if pos < len(toks) else None

    def take(kind):
        nonlocal pos
        if peek() != kind:
            raise ValueError(f"expected {kind!r} in formula {text!r}")
        pos += 1
        return toks[pos - 1]

    def expr():
        kids = [term()]
        while peek() == "|":
            take("|")
            kids.append(term())
        return kids[0] if len(kids) == 1 else ("|", kids)

    def term():
        kids = [atom()]
        while peek() == "&":
            take("&")
            kids.append(atom())
        return kids[0] if len(kids) == 1 else ("&", kids)

    def atom():
        nonlocal pos
        kind = peek()
        if kind == "var":
            return take("var")
        if kind in ("0", "1"):
            pos += 1
            return ("const", int(kind))
        if kind == "(":
            take("(")
            node = expr()
            take(")")
            return node
        raise ValueError(f"unexpected token {kind!r} in formula {text!r}")

    node = expr()
    if pos != len(toks):
        raise ValueError(f"trailing input in formula {text!r}")
    return node


def _variables(node):
    kind, arg = node
    if kind == "var":
        return {arg}
    if kind == "const":
        return set()
    return set().union(*(_variables(c) for c in arg))


def _eval_node(node, idx):
    kind, arg = node
    if kind == "var":
        return (idx >> arg & 1).astype(bool)
    if kind == "const":
        return np.full(idx.shape, bool(arg))
    vals = [_eval_node(c, idx) for c in arg]
    out = vals[0]
    for x in vals[1:]:
        out = out & x if kind == "&" else out | x
    return out


# --- structural predicates -------------------------------------------------------

def _table(f) -> np.ndarray:
    return f.array if isinstance(f, MonotoneBoolFn) else np.asarray(f, dtype=np.int8)


def is_monotone(f) -> bool:
    tab = _table(f)
    n = tab.size.bit_length() - 1
    idx = np.arange(tab.size)
    for i in range(n):
        lo = idx[(idx >> i & 1) == 0]
        if np.any(tab[lo] > tab[lo | 1 << i]):
            return False
    return True


def is_constant(f) -> bool:
    tab = _table(f)
    return bool(np.all(tab == tab[0]))


def is_conjunction(f) -> Optional[tuple[int, ...]]:
    """Indices B with f(x) = AND of x_i over B (B empty for constant 1), else None."""
    tab = _table(f)
    true = np.flatnonzero(tab)
    if true.size == 0:
        return None
    B = int(np.bitwise_and.reduce(true))
    idx = np.arange(tab.size)
    if np.array_equal(tab.astype(bool), (idx & B) == B):
        return agents_of(B)
    return None


def depends_on(f, i: int) -> bool:
    tab = _table(f)
    idx = np.arange(tab.size)
    lo = idx[(idx >> i & 1) == 0]
    return bool(np.any(tab[lo] != tab[lo | 1 << i]))


def _restrict(tab: np.ndarray, pos: int, val: int) -> np.ndarray:
    idx = np.arange(tab.size // 2)
    low = idx & ((1 << pos) - 1)
    full = low | (val << pos) | ((idx >> pos) << (pos + 1))
    return tab[full]


def restrict(f, assignment: dict[int, int]) -> tuple[tuple[int, ...], np.ndarray]:
    """Fix the assigned variables; returns (free variables, truth table over them)."""
    tab = _table(f)
    free = list(range(tab.size.bit_length() - 1))
    for var in sorted(assignment, reverse=True):
        pos = free.index(var)
        tab = _restrict(tab, pos, int(assignment[var]))
        free.pop(pos)
    return tuple(free), tab


def find_or_restriction(f) -> tuple[dict[int, int], tuple[int, int]]:
    """Assignment to all but two variables leaving their disjunction.

    Follows the inductive construction: split on a relevant variable into
    ``h = f|x=0`` and ``g = f|x=1``; recurse into whichever is neither constant
    nor a conjunction; otherwise pick a variable in h's conjunction that is not
    in g's and set the rest to 1.
    """
    tab = _table(f)
    n = tab.size.bit_length() - 1
    if n < 2:
        raise ValueError("need at least two variables")
    if not is_monotone(tab):
        raise ValueError("function is not monotone")
    if is_constant(tab):
        raise ValueError("function is constant")
    if is_conjunction(tab) is not None:
        raise ValueError("function is a conjunction of input bits")
    assignment: dict[int, int] = {}
    free = list(range(n))
    while True:
        i_pos = next(p for p in range(len(free)) if depends_on(tab, p))
        h = _restrict(tab, i_pos, 0)
        g = _restrict(tab, i_pos, 1)
        xi = free[i_pos]
        rest = free[:i_pos] + free[i_pos + 1:]
        for sub, val in ((h, 0), (g, 1)):
            if not is_constant(sub) and is_conjunction(sub) is None:
                assignment[xi] = val
                tab, free = sub, rest
                break
        else:
            Bh = set(is_conjunction(h))
            Bg = set(is_conjunction(g))
            j_pos = min(Bh - Bg)
            xj = rest[j_pos]
            for p, var in enumerate(rest):
                if p != j_pos:
                    assignment[var] = 1
            return assignment, (min(xi, xj), max(xi, xj))


def check_or_restriction(f, assignment: dict[int, int], pair: tuple[int, int]) -> bool:
    free, tab = restrict(f, assignment)
    return tuple(free) == tuple(sorted(pair)) and list(tab) == [0, 1, 1, 1]


# --- structured technologies ----------------------------------------------------

@dataclass(frozen=True)
class StructuredParams:
    f: MonotoneBoolFn
    gamma: tuple[float, ...]
    delta: tuple[float, ...]
    costs: tuple[float, ...]

    def __post_init__(self):
        n = self.f.n
        for name in ("gamma", "delta", "costs"):
            vals = tuple(float(x) for x in getattr(self, name))
            if len(vals) != n:
                raise TechnologyError(f"expected {n} {name} values, got {len(vals)}")
            object.__setattr__(self, name, vals)
        for i, (g, d) in enumerate(zip(self.gamma, self.delta)):
            if not 0.0 <= g < 1.0:
                raise TechnologyError(f"gamma_{i + 1}={g} outside [0, 1)")
            if not d <= 1.0:
                raise TechnologyError(f"delta_{i + 1}={d} above 1")
            if not d > g:
                raise TechnologyError(f"delta_{i + 1}={d} must exceed gamma_{i + 1}={g}")

    @property
    def n(self) -> int:
        return self.f.n


def structured_table(f, gamma: Sequence[float], delta: Sequence[float]) -> np.ndarray:
    """t(a) = P[f(x) = 1] with independent task outcomes; one 2x2 map per axis."""
    tab = _table(f).astype(float)
    n = tab.size.bit_length() - 1
    T = tab.reshape((2,) * n)  # axis n-1-i <-> variable i
    for i in range(n):
        M = np.array([[1.0 - gamma[i], gamma[i]], [1.0 - delta[i], delta[i]]])  # [a_i, x_i]
        ax = n - 1 - i
        T = np.moveaxis(np.tensordot(M, T, axes=([1], [ax])), 0, ax)
    return T.reshape(-1)


def build_structured(params: StructuredParams) -> Technology:
    if params.n > MAX_STRUCTURED:
        raise TechnologyError(f"structured technologies support n <= {MAX_STRUCTURED}")
    if not is_monotone(params.f):
        raise TechnologyError("success function is not monotone")
    table = structured_table(params.f, params.gamma, params.delta)
    return require_valid(Technology(params.n, params.costs, table))


def and_technology(gamma, delta, costs=1.0) -> Technology:
    n = len(gamma)
    return build_structured(StructuredParams(MonotoneBoolFn.AND(n), gamma, delta, _costs(costs, n)))


def or_technology(gamma, delta, costs=1.0) -> Technology:
    n = len(gamma)
    return build_structured(StructuredParams(MonotoneBoolFn.OR(n), gamma, delta, _costs(costs, n)))


def anonymous_or(n: int, gamma: float, delta: float, cost: float = 1.0) -> Technology:
    return or_technology([gamma] * n, [delta] * n, cost)


def _costs(costs, n):
    return (float(costs),) * n if np.isscalar(costs) else tuple(costs)


def build_nontrivial_pop_instance(f, eps: float = 1e-3) -> StructuredParams:
    """Embed the two-agent OR instance (gamma=1e-4, delta=0.9) into f.

    Bits fixed to 1 get (gamma, delta) = (1 - 2 eps, 1 - eps), bits fixed to 0
    get (eps, 2 eps): nearly deterministic and too expensive to motivate.
    """
    if not 0 < eps <= 0.01:
        raise ValueError("eps must lie in (0, 0.01]")
    fn = f if isinstance(f, MonotoneBoolFn) else MonotoneBoolFn(len(_table(f)).bit_length() - 1, tuple(f))
    assignment, pair = find_or_restriction(fn)
    gamma, delta = [0.0] * fn.n, [0.0] * fn.n
    for i in range(fn.n):
        if i in pair:
            gamma[i], delta[i] = 0.0001, 0.9
        elif assignment[i] == 1:
            gamma[i], delta[i] = 1 - 2 * eps, 1 - eps
        else:
            gamma[i], delta[i] = eps, 2 * eps
    return StructuredParams(fn, tuple(gamma), tuple(delta), (1.0,) * fn.n)


def all_monotone_functions(n: int):
    """Every monotone Boolean function of n variables (feasible for n <= 4)."""
    size = 1 << n
    order = sorted(range(size), key=lambda b: bin(b).count("1"))
    below = [[b & ~(1 << i) for i in range(n) if b >> i & 1] for b in range(size)]

    def extend(k, tab):
        if k == size:
            yield tuple(tab)
            return
        b = order[k]
        forced = any(tab[c] for c in below[b])
        for val in ((1,) if forced else (0, 1)):
            tab[b] = val
            yield from extend(k + 1, tab)
        tab[b] = 0

    yield from extend(0, [0] * size)


__all__ = [
    "MonotoneBoolFn", "StructuredParams", "parse_formula", "is_monotone", "is_constant",
    "is_conjunction", "depends_on", "restrict", "find_or_restriction", "check_or_restriction",
    "structured_table", "build_structured", "and_technology", "or_technology", "anonymous_or",
    "build_nontrivial_pop_instance", "all_monotone_functions"
]

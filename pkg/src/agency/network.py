"""Read-once source-sink networks: reliability, technologies and AND composition."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .solver_mixed import SolveOptions, contract_at, solve_mixed
from .technology import Technology, TechnologyError, require_valid

MAX_BRUTE_EDGES = 20


@dataclass(frozen=True)
class Edge:
    agent: int


@dataclass(frozen=True)
class Series:
    children: tuple


@dataclass(frozen=True)
class Parallel:
    children: tuple


SPNode = Union[Edge, Series, Parallel]


@dataclass(frozen=True)
class EdgeGraph:
    """General network: undirected edges ``(u, v, agent)`` between named nodes."""
    edges: tuple[tuple[str, str, int], ...]
    source: str
    sink: str

    def __post_init__(self):
        if self.source == self.sink:
            raise ValueError("source and sink must differ")
        agents = [a for _, _, a in self.edges]
        if len(set(agents)) != len(agents):
            raise ValueError("network is not read-once: an agent labels two edges")


Network = Union[SPNode, EdgeGraph]


def sp_agents(node: SPNode) -> list[int]:
    if isinstance(node, Edge):
        return [node.agent]
    return [a for c in node.children for a in sp_agents(c)]


def agents(net: Network) -> list[int]:
    if isinstance(net, EdgeGraph):
        return [a for _, _, a in net.edges]
    return sp_agents(net)


def check_read_once(net: Network) -> None:
    ag = agents(net)
    if len(set(ag)) != len(ag):
        raise ValueError("network is not read-once: an agent labels two edges")
    if sorted(ag) != list(range(len(ag))):
        raise ValueError("edge agents must be numbered 1..m without gaps")


_SP_TOKEN = re.compile(r"\s*(?:([SP])\s*\(|(e)(\d+)|(,)|(\)))")


def parse_sp(text: str) -> SPNode:
    """Parse ``S(P(e1,e2),e3)``; agents are 1-indexed in text, 0-indexed in the tree."""
    pos = 0
    text = text.strip()

    def node():
        nonlocal pos
        m = _SP_TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"malformed network expression at offset {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        if m.group(2):
            k = int(m.group(3))
            if k < 1:
                raise ValueError("edges are numbered from e1")
            return Edge(k - 1)
        if not m.group(1):
            raise ValueError(f"malformed network expression at offset {m.start()}")
        kind = Series if m.group(1) == "S" else Parallel
        kids = [node()]
        while True:
            m2 = _SP_TOKEN.match(text, pos)
            if not m2:
                raise ValueError(f"malformed network expression at offset {pos}")
            pos = m2.end()
            if m2.group(4):
                kids.append(node())
            elif m2.group(5):
                return kind(tuple(kids))
            else:
                raise ValueError(f"expected ',' or ')' at offset {m2.start()}")

    tree = node()
    if text[pos:].strip():
        raise ValueError(f"trailing input in network expression: {text[pos:]!r}")
    check_read_once(tree)
    return tree


def format_sp(node: SPNode) -> str:
    if isinstance(node, Edge):
        return f"e{node.agent + 1}"
    tag = "S" if isinstance(node, Series) else "P"
    return tag + "(" + ",".join(format_sp(c) for c in node.children) + ")"


def _sp_reliability(node: SPNode, probs):
    if isinstance(node, Edge):
        return probs[node.agent]
    vals = [_sp_reliability(c, probs) for c in node.children]
    if isinstance(node, Series):
        out = vals[0]
        for x in vals[1:]:
            out = out * x
        return out
    fail = 1 - vals[0]
    for x in vals[1:]:
        fail = fail * (1 - x)
    return 1 - fail


def to_graph(node: SPNode) -> EdgeGraph:
    edges = []
    counter = [0]

    def fresh():
        counter[0] += 1
        return f"n{counter[0]}"

    def build(nd, u, v):
        if isinstance(nd, Edge):
            edges.append((u, v, nd.agent))
        elif isinstance(nd, Parallel):
            for c in nd.children:
                build(c, u, v)
        else:
            prev = u
            for k, c in enumerate(nd.children):
                nxt = v if k == len(nd.children) - 1 else fresh()
                build(c, prev, nxt)
                prev = nxt

    build(node, "s", "t")
    return EdgeGraph(tuple(edges), "s", "t")


def _connected(edges, up_mask, source, sink) -> bool:
    parent: dict[str, str] = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for k, (u, v, _) in enumerate(edges):
        if up_mask >> k & 1:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
    return find(source) == find(sink)


def brute_force_reliability(graph: EdgeGraph, probs):
    """Sum over all 2^m edge states of P(state) * [source connected to sink]."""
    m = len(graph.edges)
    if m > MAX_BRUTE_EDGES:
        raise ValueError(f"brute force supports at most {MAX_BRUTE_EDGES} edges")
    p = [probs[a] for _, _, a in graph.edges]
    total = 0 * p[0] if m else 0
    for state in range(1 << m):
        if not _connected(graph.edges, state, graph.source, graph.sink):
            continue
        w = 1
        for k in range(m):
            w = w * (p[k] if state >> k & 1 else 1 - p[k])
        total = total + w
    return total


def reliability(net: Network, probs):
    """Probability that the source reaches the sink through working edges.

    Works with any numeric type supporting ``+ - *`` (floats, Fractions).
    """
    for x in probs:
        if not 0 <= x <= 1:
            raise ValueError(f"edge probability {x} outside [0, 1]")
    if isinstance(net, EdgeGraph):
        return brute_force_reliability(net, probs)
    return _sp_reliability(net, probs)


def network_to_technology(net: Network, gamma: Sequence[float], delta: Sequence[float],
                          costs) -> Technology:
    m = len(agents(net))
    if np.isscalar(costs):
        costs = (float(costs),) * m
    if not (len(gamma) == len(delta) == len(costs) == m):
        raise TechnologyError(f"network has {m} edges; parameter lists must match")
    for i, (g, d) in enumerate(zip(gamma, delta)):
        if not (0 <= g < 1 and g < d <= 1):
            raise TechnologyError(f"edge {i + 1}: need 0 <= gamma < delta <= 1, got {g}, {d}")
    table = []
    for b in range(1 << m):
        probs = [delta[i] if b >> i & 1 else gamma[i] for i in range(m)]
        table.append(float(reliability(net, probs)))
    return require_valid(Technology(m, tuple(costs), table))


def random_sp(m: int, rng: np.random.Generator) -> SPNode:
    """Random series-parallel tree over agents 0..m-1."""
    perm = [int(x) for x in rng.permutation(m)]

    def build(ids, kind):
        if len(ids) == 1:
            return Edge(ids[0])
        parts = int(rng.integers(2, min(len(ids), 3) + 1))
        cuts = sorted(int(x) for x in rng.choice(np.arange(1, len(ids)), parts - 1, replace=False))
        groups = [ids[a:b] for a, b in zip([0] + cuts, cuts + [len(ids)])]
        other = Parallel if kind is Series else Series
        return kind(tuple(build(g, other) for g in groups))

    return build(perm, Series if rng.random() < 0.5 else Parallel)


BRIDGE = EdgeGraph((("s", "a", 0), ("s", "b", 1), ("a", "b", 2), ("a", "t", 3), ("b", "t", 4)),
                   "s", "t")


# --- AND composition ------------------------------------------------------------

def and_compose(g: Technology, h: Technology) -> Technology:
    """Technology of g AND h on disjoint agents: g's agents first, then h's."""
    table = np.outer(h.table, g.table).reshape(-1)  # index = b_h * 2^n_g + b_g
    return Technology(g.n + h.n, g.costs + h.costs, table)


@dataclass(frozen=True)
class DecompositionReport:
    value: float
    q_g: tuple[float, ...]
    q_h: tuple[float, ...]
    h_value: float  # v * t_g(q_g)
    g_value: float  # v * t_h(q_h)
    h_gap: float  # optimum of h at h_value minus h's utility of q_h there
    g_gap: float

    @property
    def max_gap(self) -> float:
        return max(abs(self.h_gap), abs(self.g_gap))


def and_decomposition_check(g: Technology, h: Technology, v: float,
                            solver=None, opts: Optional[SolveOptions] = None) -> DecompositionReport:
    """Split the composed optimum and re-solve each block at its scaled value."""
    solve = solver or (lambda tech, val: solve_mixed(tech, val, opts))
    comp = and_compose(g, h)
    best = solve(comp, v)
    q = best.profile.q
    qg, qh = q[:g.n], q[g.n:]
    tg = contract_at(g, qg, v).success
    th = contract_at(h, qh, v).success
    hv, gv = v * tg, v * th
    h_gap = solve(h, hv).utility - contract_at(h, qh, hv).utility
    g_gap = solve(g, gv).utility - contract_at(g, qg, gv).utility
    return DecompositionReport(v, qg, qh, hv, gv, h_gap, g_gap)

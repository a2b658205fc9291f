"""Line-oriented text formats for technologies.

Three kinds, selected by the first non-comment line::

    explicit n=2                 structured n=2             network
    costs 1 1                    costs 1 1                  costs 1 1 1
    table 0.17 0.92 0.92 0.99    gamma 0.09 0.09            gamma 0.1 0.1 0.1
                                 delta 0.91 0.91            delta 0.9 0.9 0.9
                                 formula x1 | x2            sp S(P(e1,e2),e3)

A network may instead list ``edges`` followed by ``u v agent`` lines and
``source``/``sink`` lines.  ``#`` starts a comment.  Table entries are in
bitmask order with agent 1 at the least-significant bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .boolfn import MonotoneBoolFn, StructuredParams, build_structured
from .network import Edge, EdgeGraph, Network, Parallel, agents, network_to_technology, parse_sp
from .technology import Technology, require_valid


class ParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class Instance:
    tech: Technology
    kind: str
    structured: Optional[StructuredParams] = None
    network: Optional[Network] = None

    @property
    def or_params(self) -> Optional[tuple[tuple[float, ...], tuple[float, ...]]]:
        """(gammas, deltas) when the instance is an OR technology."""
        if self.structured is not None:
            s = self.structured
            if s.f == MonotoneBoolFn.OR(s.n):
                return s.gamma, s.delta
        return None


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def _floats(rest: str, no: int, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in rest.split())
    except ValueError:
        raise ParseError(f"'{key}' expects numbers, got {rest!r}", no) from None


def _header_n(words, no):
    n = None
    for w in words[1:]:
        if w.startswith("n="):
            try:
                n = int(w[2:])
            except ValueError:
                raise ParseError(f"bad agent count {w!r}", no) from None
        else:
            raise ParseError(f"unexpected header field {w!r}", no)
    return n


def parse_text(text: str) -> Instance:
    lines = list(_lines(text))
    if not lines:
        raise ParseError("empty input")
    no, head = lines[0]
    words = head.split()
    kind = words[0]
    if kind not in ("explicit", "structured", "network"):
        raise ParseError(f"unknown technology kind {kind!r}", no)
    n = _header_n(words, no)
    fields: dict[str, tuple[int, str]] = {}
    edges: list[tuple[str, str, int]] = []
    in_edges = False
    for no, line in lines[1:]:
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if kind == "network" and key == "edges" and not rest:
            in_edges = True
            continue
        if in_edges and key not in ("source", "sink", "costs", "gamma", "delta"):
            parts = line.split()
            if len(parts) != 3:
                raise ParseError("edge lines need 'u v agent'", no)
            try:
                agent = int(parts[2])
            except ValueError:
                raise ParseError(f"edge agent must be an integer, got {parts[2]!r}", no) from None
            if agent < 1:
                raise ParseError("edge agents are numbered from 1", no)
            edges.append((parts[0], parts[1], agent - 1))
            continue
        if key in fields:
            raise ParseError(f"duplicate '{key}' line", no)
        fields[key] = (no, rest)

    def need(key):
        if key not in fields:
            raise ParseError(f"missing '{key}' line")
        return fields[key]

    def nums(key):
        no_, rest = need(key)
        return _floats(rest, no_, key)

    allowed = {"explicit": {"costs", "table"},
               "structured": {"costs", "gamma", "delta", "formula"},
               "network": {"costs", "gamma", "delta", "sp", "source", "sink"}}[kind]
    for key, (no_, _) in fields.items():
        if key not in allowed:
            raise ParseError(f"unexpected '{key}' line in {kind} technology", no_)

    if kind == "explicit":
        costs, table = nums("costs"), nums("table")
        if n is None:
            n = len(costs)
        if len(costs) != n:
            raise ParseError(f"expected {n} costs, got {len(costs)}", fields["costs"][0])
        if len(table) != 1 << n:
            raise ParseError(f"expected {1 << n} table entries, got {len(table)}", fields["table"][0])
        return Instance(require_valid(Technology(n, costs, table)), kind)

    costs, gamma, delta = nums("costs"), nums("gamma"), nums("delta")
    if kind == "structured":
        no_, formula = need("formula")
        try:
            f = MonotoneBoolFn.from_formula(formula, n if n is not None else len(costs))
        except ValueError as e:
            raise ParseError(str(e), no_) from None
        params = StructuredParams(f, gamma, delta, costs)
        return Instance(build_structured(params), kind, structured=params)

    net: Network
    if "sp" in fields:
        no_, expr = fields["sp"]
        try:
            net = parse_sp(expr)
        except ValueError as e:
            raise ParseError(str(e), no_) from None
    else:
        if not edges:
            raise ParseError("network needs an 'sp' expression or an 'edges' block")
        try:
            net = EdgeGraph(tuple(edges), need("source")[1], need("sink")[1])
        except ValueError as e:
            raise ParseError(str(e)) from None
    m = len(agents(net))
    if n is not None and n != m:
        raise ParseError(f"header says n={n} but network has {m} edges")
    tech = network_to_technology(net, gamma, delta, costs)
    params = None
    if isinstance(net, Parallel) and all(isinstance(c, Edge) for c in net.children):
        params = StructuredParams(MonotoneBoolFn.OR(m), gamma, delta, costs)
    return Instance(tech, kind, structured=params, network=net)


def load(path: Union[str, Path]) -> Instance:
    return parse_text(Path(path).read_text(encoding="utf-8"))


def format_explicit(tech: Technology) -> str:
    return "\n".join([
        f"explicit n={tech.n}",
        "costs " + " ".join(repr(c) for c in tech.costs),
        "table " + " ".join(repr(float(x)) for x in tech.table),
    ]) + "\n"

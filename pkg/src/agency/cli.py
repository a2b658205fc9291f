"""Command-line front end.

Exit codes: 0 ok, 2 invalid input, 3 parse error, 4 solver size cap,
5 a proven bound was violated (which means a solver bug).
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from typing import Optional, Sequence

from . import diagram as dg
from .formats import Instance, ParseError, load
from .purity import pop
from .solver_mixed import SolverCapError, solve_mixed
from .solver_pure import pou, solve_observable, solve_pure
from .technology import TechnologyError, agents_of, classify_returns, is_anonymous, validate

EXIT_OK, EXIT_INVALID, EXIT_PARSE, EXIT_CAP, EXIT_BOUND = 0, 2, 3, 4, 5


def _set(mask: int) -> str:
    return "{" + ",".join(str(i + 1) for i in agents_of(mask)) + "}"


def _nums(xs, fmt=".6f") -> str:
    return " ".join(format(x, fmt) for x in xs)


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def cmd_validate(args) -> int:
    inst = load(args.path)
    rep = validate(inst.tech)
    if args.csv:
        rows = [("valid", "problem")] + [("true" if rep.ok else "false", p) for p in rep.problems or ("",)]
        print(_csv(rows), end="")
    else:
        print(f"{inst.kind} technology, n={inst.tech.n}: {'valid' if rep.ok else 'INVALID'}")
        for p in rep.problems:
            print(f"  - {p}")
    return EXIT_OK if rep.ok else EXIT_INVALID


def cmd_classify(args) -> int:
    inst = load(args.path)
    rc = classify_returns(inst.tech)
    levels = is_anonymous(inst.tech)
    if args.csv:
        print(_csv([("returns", "anonymous", "levels"),
                    (rc.label, "true" if levels else "false", _nums(levels) if levels else "")]), end="")
    else:
        print(f"returns to scale: {rc.label}")
        for tag, w in (("IRS", rc.irs_witness), ("DRS", rc.drs_witness)):
            if w is not None:
                i, a, b, gap = w
                print(f"  {tag} fails: agent {i + 1}, a={_set(a)} <= b={_set(b)}, "
                      f"marginal(b)-marginal(a)={gap:.3g}")
        print("anonymous: " + (f"yes, t_0..t_n = {_nums(levels)}" if levels else "no"))
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = load(args.path)
    tech, v = inst.tech, args.value
    if not v > 0:
        raise TechnologyError("value must be positive")
    if args.mode == "pure":
        c = solve_pure(tech, v)
        q = [1.0 if c.mask >> i & 1 else 0.0 for i in range(tech.n)]
        pays, succ, util = c.payments, c.success, c.utility
    elif args.mode == "observable":
        o = solve_observable(tech, v)
        q = [1.0 if o.mask >> i & 1 else 0.0 for i in range(tech.n)]
        pays = [tech.costs[i] if o.mask >> i & 1 else 0.0 for i in range(tech.n)]
        succ, util = o.success, o.utility
    else:
        m = solve_mixed(tech, v)
        q, pays, succ, util = m.profile.q, m.payments, m.success, m.utility
    contracted = sum(1 << i for i, x in enumerate(q) if x > 0)
    if args.csv:
        print(_csv([("mode", "value", "set", "profile", "payments", "success", "utility"),
                    (args.mode, f"{v:.10g}", _set(contracted), _nums(q), _nums(pays),
                     f"{succ:.10f}", f"{util:.10f}")]), end="")
    else:
        print(f"mode: {args.mode}   value: {v:g}")
        print(f"contracted agents: {_set(contracted)}")
        print(f"effort profile: {_nums(q)}")
        print(f"payments on success: {_nums(pays)}")
        print(f"success probability: {succ:.6f}")
        print(f"principal utility: {util:.6f}")
    return EXIT_OK


def _report(inst: Instance, oracle: Optional[float] = None):
    return pop(inst.tech, or_params=inst.or_params, oracle_resolution=oracle)


def cmd_pop(args) -> int:
    inst = load(args.path)
    r = _report(inst, args.oracle)
    mc, pc = r.mixed_at_witness, r.pure_at_witness
    if args.csv:
        print(_csv([("pop", "witness_v", "profile", "pure_set", "utility_mixed", "utility_pure", "oracle_pop"),
                    (f"{r.pop:.6f}", f"{r.witness_v:.10g}", _nums(mc.profile.q) if mc else "",
                     _set(pc.mask) if pc else "", f"{mc.utility:.10f}" if mc else "",
                     f"{pc.utility:.10f}" if pc else "",
                     "" if r.oracle_pop is None else f"{r.oracle_pop:.6f}")]), end="")
    else:
        print(f"POP = {r.pop:.6f}")
        if mc is not None:
            print(f"attained at v = {r.witness_v:.6f}")
            print(f"  mixed: profile {_nums(mc.profile.q)}, utility {mc.utility:.6f}")
            print(f"  pure:  set {_set(pc.mask)}, utility {pc.utility:.6f}")
        if r.oracle_pop is not None:
            print(f"grid-oracle POP = {r.oracle_pop:.6f}")
        for b in r.violations:
            print(f"  BOUND VIOLATED: {b.name} = {b.value:.6f}")
    return EXIT_BOUND if r.violations else EXIT_OK


def cmd_pou(args) -> int:
    inst = load(args.path)
    val, where = pou(inst.tech)
    if args.csv:
        print(_csv([("pou", "witness_v"), (f"{val:.6f}", f"{where:.10g}")]), end="")
    else:
        print(f"POU = {val:.6f} at v = {where:.6f}")
    return EXIT_OK


def cmd_bounds(args) -> int:
    inst = load(args.path)
    r = _report(inst)
    rows = [("bound", "value", "applicable", "satisfied", "pop")]
    for b in r.bounds:
        rows.append((b.name, "" if not b.applicable else f"{b.value:.6f}",
                     "true" if b.applicable else "false",
                     "" if b.satisfied is None else ("true" if b.satisfied else "false"),
                     f"{r.pop:.6f}"))
    if args.csv:
        print(_csv(rows), end="")
    else:
        print(f"POP = {r.pop:.6f}")
        for b in r.bounds:
            if not b.applicable:
                status, val = "n/a ", "-"
            else:
                status, val = ("pass" if b.satisfied else "FAIL"), f"{b.value:.6f}"
            print(f"  [{status}] {b.name:<40s} {val}")
    return EXIT_BOUND if r.violations else EXIT_OK


def cmd_diagram(args) -> int:
    if not 0 < args.gamma_min <= args.gamma_max < 0.5:
        raise TechnologyError("gamma range must lie in (0, 0.5)")
    if not 0 < args.v_min <= args.v_max:
        raise TechnologyError("value range must be positive")
    gammas = dg.axis(args.gamma_min, args.gamma_max, args.gamma_steps)
    values = dg.axis(args.v_min, args.v_max, args.v_steps, args.v_scale)
    cells = dg.phase_diagram(gammas, values, n=args.n, jobs=args.jobs)
    text = dg.to_csv(cells)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="agency", description="Combinatorial agency contract solver.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_path(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("path")
        sp.add_argument("--csv", action="store_true", help="machine-readable output")
        sp.set_defaults(fn=fn)
        return sp

    with_path("validate", cmd_validate, "check technology invariants")
    with_path("classify", cmd_classify, "returns to scale and anonymity")
    sp = with_path("solve", cmd_solve, "optimal contract at one value")
    sp.add_argument("--value", "-v", type=float, required=True)
    sp.add_argument("--mode", choices=("pure", "mixed", "observable"), default="mixed")
    sp = with_path("pop", cmd_pop, "price of purity")
    sp.add_argument("--oracle", type=float, default=None, metavar="RES",
                    help="also run the grid oracle at this resolution (n <= 2 or 3)")
    with_path("pou", cmd_pou, "price of unaccountability")
    with_path("bounds", cmd_bounds, "audit every applicable POP bound")

    sp = sub.add_parser("diagram", help="phase diagram for 2-agent OR with delta = 1 - gamma (CSV)")
    sp.add_argument("--gamma-min", type=float, default=0.01)
    sp.add_argument("--gamma-max", type=float, default=0.49)
    sp.add_argument("--gamma-steps", type=int, default=49)
    sp.add_argument("--v-min", type=float, default=1.0)
    sp.add_argument("--v-max", type=float, default=1000.0)
    sp.add_argument("--v-steps", type=int, default=200)
    sp.add_argument("--v-scale", choices=("lin", "log"), default="lin")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=cmd_diagram)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except SolverCapError as e:
        print(f"resource cap: {e}", file=sys.stderr)
        return EXIT_CAP
    except (TechnologyError, ValueError) as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"cannot read input: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())

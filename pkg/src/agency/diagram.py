"""Optimal-contract regions over (gamma, value) for anonymous OR with delta = 1 - gamma."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .boolfn import anonymous_or
from .solver_mixed import SolveOptions, solve_mixed
from .solver_pure import solve_pure
from .technology import popcount

MIX_MARGIN = 1e-6
HEADER = ("gamma", "v", "region", "mix_q", "utility_mixed", "utility_pure")


@dataclass(frozen=True)
class PhaseDiagramCell:
    gamma: float
    v: float
    region: str  # "0".."n" or "MIXED"
    mix_q: Optional[float]
    utility_mixed: float
    utility_pure: float

    def row(self) -> tuple[str, ...]:
        return (f"{self.gamma:.6g}", f"{self.v:.6g}", self.region,
                "" if self.mix_q is None else f"{self.mix_q:.6f}",
                f"{self.utility_mixed:.9g}", f"{self.utility_pure:.9g}")


def diagram_cell(gamma: float, v: float, n: int = 2, opts: Optional[SolveOptions] = None) -> PhaseDiagramCell:
    tech = anonymous_or(n, gamma, 1.0 - gamma)
    pure = solve_pure(tech, v)
    mixed = solve_mixed(tech, v, opts)
    if not mixed.degenerate and mixed.utility - pure.utility > MIX_MARGIN:
        q = [x for x in mixed.profile.q if x > 0]
        return PhaseDiagramCell(gamma, v, "MIXED", float(np.mean(q)), mixed.utility, pure.utility)
    return PhaseDiagramCell(gamma, v, str(popcount(pure.mask)), None, max(mixed.utility, pure.utility),
                            pure.utility)


def axis(lo: float, hi: float, steps: int, scale: str = "lin") -> np.ndarray:
    if steps < 1:
        raise ValueError("steps must be positive")
    if steps == 1:
        return np.array([lo])
    if scale == "log":
        return np.geomspace(lo, hi, steps)
    return np.linspace(lo, hi, steps)


def _cell(args):
    return diagram_cell(*args)


def phase_diagram(gammas: Iterable[float], values: Iterable[float], n: int = 2,
                  opts: Optional[SolveOptions] = None, jobs: int = 1) -> list[PhaseDiagramCell]:
    """Row-major (gamma outer, v inner) grid of cells."""
    gammas = [float(g) for g in gammas]
    values = [float(v) for v in values]
    for g in gammas:
        if not 0 < g < 0.5:
            raise ValueError(f"gamma={g} outside (0, 0.5)")
    for v in values:
        if not v > 0:
            raise ValueError(f"value {v} must be positive")
    tasks = [(g, v, n, opts) for g in gammas for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            return list(ex.map(_cell, tasks, chunksize=64))
    return [_cell(t) for t in tasks]


def to_csv(cells: Iterable[PhaseDiagramCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for c in cells:
        w.writerow(c.row())
    return buf.getvalue()

"""Search two-agent OR parameters for the largest price of purity.

Anonymous instances sweep (gamma, delta) on a grid; the non-anonymous pass
draws random per-agent parameters and costs.  Prints the best instances.
"""
import argparse
import heapq
import time

import numpy as np

from agency.boolfn import or_technology
from agency.purity import pop


def evaluate(gammas, deltas, costs):
    tech = or_technology(gammas, deltas, costs=tuple(costs))
    r = pop(tech, with_bounds=False)
    return r.pop, r.witness_v


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=60, help="grid steps per axis for the anonymous sweep")
    ap.add_argument("--random", type=int, default=2000, help="random non-anonymous draws")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--top", type=int, default=10)
    args = ap.parse_args()

    t0 = time.perf_counter()
    best = []
    for g in np.geomspace(1e-5, 0.45, args.steps):
        for d in np.linspace(0.5, 0.999, args.steps):
            if d <= g:
                continue
            p, v = evaluate((g, g), (d, d), (1.0, 1.0))
            heapq.heappush(best, (p, v, f"anonymous gamma={g:.5g} delta={d:.4f}"))
    rng = np.random.default_rng(args.seed)
    for _ in range(args.random):
        g = rng.uniform(0, 0.3, 2) ** 2
        d = np.minimum(g + rng.uniform(0.3, 1.0, 2), 0.9999)
        c = rng.uniform(0.5, 2.0, 2)
        p, v = evaluate(g, d, c)
        heapq.heappush(best, (p, v, f"gamma={g.round(5).tolist()} delta={d.round(4).tolist()} "
                                    f"costs={c.round(3).tolist()}"))
    top = heapq.nlargest(args.top, best)
    print(f"searched {len(best)} instances in {time.perf_counter() - t0:.1f}s")
    for p, v, desc in top:
        print(f"  pop={p:.6f} at v={v:9.3f}  {desc}")
    print("largest ratio exceeds 1.0233:", top[0][0] > 1.0233)


if __name__ == "__main__":
    main()

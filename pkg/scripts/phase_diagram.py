"""Emit the two-agent OR phase diagram (delta = 1 - gamma) as CSV and summarize it."""
import argparse
import collections
import time

from agency.diagram import axis, phase_diagram, to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gamma", nargs=3, type=float, default=(0.01, 0.49, 49), metavar=("MIN", "MAX", "STEPS"))
    ap.add_argument("--value", nargs=3, type=float, default=(1.0, 1000.0, 200), metavar=("MIN", "MAX", "STEPS"))
    ap.add_argument("--scale", choices=("lin", "log"), default="lin")
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="phase_diagram.csv")
    args = ap.parse_args()

    t0 = time.perf_counter()
    gammas = axis(args.gamma[0], args.gamma[1], int(args.gamma[2]))
    values = axis(args.value[0], args.value[1], int(args.value[2]), args.scale)
    cells = phase_diagram(gammas, values, n=args.n, jobs=args.jobs)
    with open(args.out, "w", newline="") as fh:
        fh.write(to_csv(cells))

    counts = collections.Counter(c.region for c in cells)
    print(f"{len(cells)} cells in {time.perf_counter() - t0:.1f}s -> {args.out}")
    for region in sorted(counts, key=lambda r: (r == "MIXED", r)):
        print(f"  region {region:>5}: {counts[region]}")
    by_gamma = collections.defaultdict(list)
    for c in cells:
        if c.region == "MIXED":
            by_gamma[c.gamma].append(c)
    for g in sorted(by_gamma):
        cs = by_gamma[g]
        print(f"  gamma={g:.3f}: mixed for v in [{cs[0].v:.1f}, {cs[-1].v:.1f}], "
              f"q from {cs[0].mix_q:.4f} to {cs[-1].mix_q:.4f}")


if __name__ == "__main__":
    main()

"""Measure how convexity-graph density drives tree size and cut usefulness.

Generates instances with a prescribed edge density, then compares the plain
kkt formulation against the same formulation with pairwise cuts.  Sparse
graphs admit many cuts (one per non-edge), so the contrast is largest there.
"""

import argparse

from stqp import (
    DensitySpec,
    SolverConfig,
    bench_run,
    build_convexity_graph,
    gen_st_density,
)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=15, help="instance dimension")
    ap.add_argument("--count", type=int, default=5, help="instances per density")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--densities", default="0.1,0.3,0.5,0.7,0.9",
                    help="comma-separated target densities in [0, 1]")
    ap.add_argument("--time-limit", type=float, default=120.0)
    args = ap.parse_args(argv)

    densities = [float(d) for d in args.densities.split(",")]
    cfg = SolverConfig(time_limit_s=args.time_limit)
    variants = ["milp1-l1", "milp1-l1-vi"]
    max_edges = args.n * (args.n - 1) // 2

    print(f"{'density':>8s} {'edges':>6s} {'nodes':>7s} {'nodes+vi':>8s} "
          f"{'wall_s':>7s} {'wall_s+vi':>9s}")
    for density in densities:
        spec = DensitySpec(density)
        instances = [gen_st_density(args.n, 1000 * args.seed + k, spec)
                     for k in range(args.count)]
        edges = sum(len(build_convexity_graph(i).edges) for i in instances)
        records = bench_run(instances, variants, cfg)
        by = {v: [r for r in records if r.variant == v] for v in variants}
        plain, cut = by["milp1-l1"], by["milp1-l1-vi"]
        print(f"{density:8.2f} {edges / len(instances):6.1f} "
              f"{sum(r.nodes for r in plain) / len(plain):7.1f} "
              f"{sum(r.nodes for r in cut) / len(cut):8.1f} "
              f"{sum(r.wall_s for r in plain) / len(plain):7.2f} "
              f"{sum(r.wall_s for r in cut) / len(cut):9.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

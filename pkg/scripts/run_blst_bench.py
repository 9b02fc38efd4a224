"""Sweep every solver variant over a seeded BLST corpus and write reports.

Reproduces the desk-scale benchmark: 20 triangular-entry instances at n=30,
each solved by all eight formulation/bound/cut combinations, with a summary
table and a performance profile written to --out-dir.
"""

import argparse
from pathlib import Path

from stqp import (
    ALL_VARIANTS,
    SolverConfig,
    bench_run,
    gen_blst,
    performance_profile,
    profile_to_csv,
    records_to_csv,
    records_to_json,
    render_summary,
    summarize,
)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=30, help="instance dimension")
    ap.add_argument("--count", type=int, default=20, help="instances to generate")
    ap.add_argument("--seed", type=int, default=0, help="first seed; consecutive after")
    ap.add_argument("--variants", default=",".join(ALL_VARIANTS),
                    help="comma-separated variant labels")
    ap.add_argument("--time-limit", type=float, default=120.0,
                    help="per-solve wall limit in seconds")
    ap.add_argument("--out-dir", type=Path, default=Path("results") / "blst")
    args = ap.parse_args(argv)

    instances = [gen_blst(args.n, args.seed + k) for k in range(args.count)]
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    cfg = SolverConfig(time_limit_s=args.time_limit)
    total = len(instances) * len(variants)
    done = []

    def progress(rec):
        done.append(rec)
        print(f"[{len(done):3d}/{total}] {rec.instance:16s} {rec.variant:12s} "
              f"{rec.status:10s} value={rec.value:.9f} nodes={rec.nodes:4d} "
              f"wall={rec.wall_s:6.2f}s")

    records = bench_run(instances, variants, cfg, on_record=progress)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    meta = {"family": "blst", "n": args.n, "count": args.count,
            "seed": args.seed, "time_limit_s": args.time_limit}
    (args.out_dir / "records.csv").write_text(records_to_csv(records))
    (args.out_dir / "records.json").write_text(records_to_json(records, meta))
    summary = render_summary(summarize(records))
    (args.out_dir / "summary.txt").write_text(summary + "\n")
    (args.out_dir / "profile.csv").write_text(
        profile_to_csv(performance_profile(records)))
    print()
    print(summary)
    print(f"\nreports written to {args.out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

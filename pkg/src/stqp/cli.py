"""Command-line interface.

Subcommands: solve, bound, oracle, generate, bench, profile, stableset.

Option resolution order: command line, then environment (``STQP_<NAME>``
with dashes as underscores, e.g. ``STQP_TIME_LIMIT``), then a ``--config``
file of ``key = value`` lines, then built-in defaults.

Exit codes: 0 success, 2 malformed input file or bad usage, 3 time limit
reached with the gap above tolerance, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import bench as bench_mod
from .bounds import SplittingConfig, big_m, lambda_bounds, lb1, lb2
from .core import SolveStatus, StqpInstance, preprocess_trivial
from .gen import (
    DensitySpec,
    ParseError,
    TriangularSpec,
    gen_blst,
    gen_st_density,
    load_dimacs,
    load_instance,
    save_instance,
)
from .graph import alpha_bruteforce, build_convexity_graph, motzkin_straus, oracle_solve, valid_inequality_pairs
from .milp import add_valid_inequalities, build_milp1, build_milp2, build_stable_set_ilp, export_lp_text
from .solver import SolverConfig, minimize, solve_milp

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_TIME_LIMIT = 3
EXIT_INTERNAL = 4

_TRUE_WORDS = {"1", "true", "yes", "on"}
_FALSE_WORDS = {"0", "false", "no", "off"}


def _load_config(path) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno)
        key, value = line.split("=", 1)
        out[key.strip().lower().replace("_", "-")] = value.strip()
    return out


def _cast(text: str, kind):
    if kind is bool:
        word = text.strip().lower()
        if word in _TRUE_WORDS:
            return True
        if word in _FALSE_WORDS:
            return False
        raise ValueError(f"not a boolean: {text!r}")
    return kind(text)


class _Options:
    """Layered option lookup: CLI > environment > config file > default."""

    def __init__(self, ns: argparse.Namespace):
        self.ns = ns
        self.config = _load_config(ns.config) if getattr(ns, "config", None) else {}

    def get(self, key: str, kind, default):
        attr = key.replace("-", "_")
        value = getattr(self.ns, attr, None)
        if value is not None:
            return value
        env = os.environ.get("STQP_" + attr.upper())
        if env is not None:
            return _cast(env, kind)
        if key in self.config:
            return _cast(self.config[key], kind)
        return default


def _solver_config(opts: _Options) -> SolverConfig:
    deterministic = opts.get("deterministic", bool, True)
    workers = opts.get("threads", int, 1)
    if deterministic:
        workers = 1
    return SolverConfig(
        gap_tol=opts.get("gap", float, 1e-6),
        time_limit_s=opts.get("time-limit", float, 3600.0),
        deterministic=deterministic,
        workers=workers,
    )


def _build_variant_model(inst: StqpInstance, formulation: str, bound_kind: str, use_vi: bool,
                         splitting: SplittingConfig | None = None):
    lb = lb1(inst) if bound_kind == "l1" else lb2(inst, splitting)
    bigm = big_m(inst, lb)
    build = build_milp1 if formulation == "milp1" else build_milp2
    model = build(inst, lb, bigm)
    if use_vi:
        model = add_valid_inequalities(
            model, valid_inequality_pairs(build_convexity_graph(inst))
        )
    return model, lb


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=1))


def _solution_payload(sol) -> dict:
    return {
        "value": sol.value,
        "bound": sol.best_bound,
        "gap": sol.gap,
        "support": list(sol.support),
        "x": [float(v) for v in sol.x] if sol.x is not None else None,
        "status": sol.status.value,
        "nodes": sol.stats.nodes,
        "lp_count": sol.stats.lp_count,
        "wall_s": sol.stats.wall_s,
    }


def cmd_solve(ns: argparse.Namespace) -> int:
    opts = _Options(ns)
    inst = load_instance(ns.instance)
    formulation = opts.get("formulation", str, "milp1")
    bound_kind = opts.get("bound", str, "l1")
    use_vi = opts.get("vi", bool, False)
    cfg = _solver_config(opts)
    trivial = preprocess_trivial(inst)
    if trivial is not None:
        payload = _solution_payload(trivial)
        payload["trivial"] = True
        _emit(payload)
        return EXIT_OK
    model, _lb = _build_variant_model(inst, formulation, bound_kind, use_vi)
    if ns.export_lp:
        Path(ns.export_lp).write_text(export_lp_text(model))
    sol = solve_milp(inst, model, cfg)
    payload = _solution_payload(sol)
    payload["trivial"] = False
    payload["variant"] = f"{formulation}-{bound_kind}" + ("-vi" if use_vi else "")
    _emit(payload)
    if sol.status == SolveStatus.TIME_LIMIT and sol.gap > cfg.gap_tol:
        return EXIT_TIME_LIMIT
    if sol.status in (SolveStatus.ERROR, SolveStatus.INFEASIBLE_MODEL):
        return EXIT_INTERNAL
    return EXIT_OK


def cmd_bound(ns: argparse.Namespace) -> int:
    opts = _Options(ns)
    inst = load_instance(ns.instance)
    kind = opts.get("kind", str, "both")
    payload: dict = {"instance": inst.name, "n": inst.n}
    if kind in ("l1", "both"):
        cert = lb1(inst)
        payload["l1"] = cert.value
        payload["big_m_l1"] = [float(v) for v in big_m(inst, cert).m]
        payload["lambda_bounds_l1"] = list(lambda_bounds(inst, cert))
    if kind in ("l2", "both"):
        splitting = SplittingConfig(allow_large=bool(ns.allow_large))
        cert = lb2(inst, splitting)
        payload["l2"] = {
            "value": cert.value,
            "lambda_hat": cert.lambda_hat,
            "residual_primal": cert.residuals[0],
            "residual_dual": cert.residuals[1],
            "certification_shift": cert.residuals[2],
            "converged": cert.converged,
            "seconds": cert.seconds,
        }
        payload["big_m_l2"] = [float(v) for v in big_m(inst, cert).m]
        payload["lambda_bounds_l2"] = list(lambda_bounds(inst, cert))
    _emit(payload)
    return EXIT_OK


def cmd_oracle(ns: argparse.Namespace) -> int:
    inst = load_instance(ns.instance)
    sol = oracle_solve(inst, max_support=ns.max_support, clique_cap=ns.clique_cap)
    payload = _solution_payload(sol)
    payload["lambda"] = sol.certificate.lambda_ if sol.certificate else None
    _emit(payload)
    return EXIT_OK


def cmd_generate(ns: argparse.Namespace) -> int:
    out_dir = Path(ns.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    trivial_count = 0
    for k in range(ns.count):
        seed = ns.seed + k
        if ns.family == "blst":
            a, c, b = (float(t) for t in ns.params.split(","))
            inst = gen_blst(ns.n, seed, TriangularSpec(a, c, b))
        else:
            inst = gen_st_density(ns.n, seed, DensitySpec(density=ns.density))
        if preprocess_trivial(inst) is not None:
            trivial_count += 1
            if ns.skip_trivial:
                continue
        suffix = ".json" if ns.format == "json" else ".stqp"
        path = out_dir / f"{inst.name}{suffix}"
        save_instance(path, inst, fmt=ns.format)
        files.append(str(path))
    _emit(
        {
            "family": ns.family,
            "n": ns.n,
            "count": ns.count,
            "written": len(files),
            "trivial": trivial_count,
            "trivial_fraction": trivial_count / ns.count if ns.count else 0.0,
            "files": files,
        }
    )
    return EXIT_OK


def _collect_instance_paths(paths) -> list[Path]:
    out: list[Path] = []
    for p in paths:
        path = Path(p)
        if path.is_dir():
            out.extend(sorted(q for q in path.iterdir() if q.suffix in (".stqp", ".json", ".txt")))
        else:
            out.append(path)
    return out


def cmd_bench(ns: argparse.Namespace) -> int:
    opts = _Options(ns)
    cfg = _solver_config(opts)
    variants = [v.strip() for v in opts.get("variants", str, ",".join(bench_mod.ALL_VARIANTS)).split(",") if v.strip()]
    instances = [load_instance(p) for p in _collect_instance_paths(ns.instances)]
    records = bench_mod.bench_run(instances, variants, cfg)
    summary_rows = bench_mod.summarize(records)
    table = bench_mod.render_summary(summary_rows)
    print(table)
    if ns.out_dir:
        out_dir = Path(ns.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "records.csv").write_text(bench_mod.records_to_csv(records))
        meta = {
            "variants": variants,
            "gap_tol": cfg.gap_tol,
            "time_limit_s": cfg.time_limit_s,
            "deterministic": cfg.deterministic,
            "instances": [inst.name for inst in instances],
        }
        (out_dir / "records.json").write_text(bench_mod.records_to_json(records, meta))
        (out_dir / "summary.txt").write_text(table + "\n")
        points = bench_mod.performance_profile(records)
        (out_dir / "profile.csv").write_text(bench_mod.profile_to_csv(points))
    bad_time = any(
        r.status == SolveStatus.TIME_LIMIT.value and r.gap > cfg.gap_tol for r in records
    )
    if any(r.status == SolveStatus.ERROR.value for r in records):
        return EXIT_INTERNAL
    return EXIT_TIME_LIMIT if bad_time else EXIT_OK


def cmd_profile(ns: argparse.Namespace) -> int:
    records = bench_mod.records_from_csv(Path(ns.records).read_text())
    points = bench_mod.performance_profile(records)
    text = bench_mod.profile_to_csv(points)
    if ns.out:
        Path(ns.out).write_text(text)
    else:
        print(text, end="")
    if ns.plot:
        bench_mod.plot_profile(points, ns.plot)
    return EXIT_OK


def cmd_stableset(ns: argparse.Namespace) -> int:
    opts = _Options(ns)
    cfg = _solver_config(opts)
    graph = load_dimacs(ns.graph, complement=bool(ns.complement))
    ilp = build_stable_set_ilp(graph)
    ilp_res = minimize(ilp, cfg)
    alpha_ilp = int(round(-ilp_res.objective))
    inst = motzkin_straus(graph)
    formulation = opts.get("formulation", str, "milp1")
    bound_kind = opts.get("bound", str, "l1")
    use_vi = opts.get("vi", bool, True)
    model, _lb = _build_variant_model(inst, formulation, bound_kind, use_vi)
    sol = solve_milp(inst, model, cfg)
    alpha_ms = int(round(1.0 / sol.value)) if sol.value > 0 else None
    payload = {
        "n": graph.n,
        "edges": len(graph.edges),
        "complemented": bool(ns.complement),
        "alpha_ilp": alpha_ilp,
        "ilp_nodes": ilp_res.stats.nodes,
        "ms_value": sol.value,
        "alpha_from_ms": alpha_ms,
        "agree": alpha_ms == alpha_ilp,
        "ms_status": sol.status.value,
        "ilp_status": ilp_res.status.value,
    }
    if graph.n <= 25:
        payload["alpha_bruteforce"] = alpha_bruteforce(graph)
    _emit(payload)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stqp", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser):
        p.add_argument("--config", help="key = value option file")
        p.add_argument("--gap", type=float, default=None, help="relative gap tolerance (default 1e-6)")
        p.add_argument("--time-limit", type=float, default=None, help="wall clock limit in seconds (default 3600)")
        p.add_argument("--threads", type=int, default=None, help="worker count (deterministic mode forces 1)")
        p.add_argument("--deterministic", action="store_true", default=None, help="reproducible single-worker search (default on)")

    p = sub.add_parser("solve", help="solve one instance through a MILP reformulation")
    p.add_argument("instance")
    p.add_argument("--formulation", choices=("milp1", "milp2"), default=None, help="kkt form (milp1) or overestimator form (milp2)")
    p.add_argument("--bound", choices=("l1", "l2"), default=None, help="lower bound used for big-M and the scalar variable")
    p.add_argument("--vi", action="store_true", default=None, help="add convexity-graph cuts y_i + y_j <= 1")
    p.add_argument("--export-lp", default=None, help="write the model as LP text before solving")
    add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bound", help="print lower bounds and big-M data as JSON")
    p.add_argument("instance")
    p.add_argument("--kind", choices=("l1", "l2", "both"), default=None)
    p.add_argument("--allow-large", action="store_true", help="lift the semidefinite bound size limit")
    p.add_argument("--config", help="key = value option file")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("oracle", help="exact solve by clique-support enumeration (small n)")
    p.add_argument("instance")
    p.add_argument("--max-support", type=int, default=None)
    p.add_argument("--clique-cap", type=int, default=1_000_000)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("generate", help="write a corpus of random instances")
    p.add_argument("--family", choices=("blst", "st"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--params", default="0,0.5,1", help="triangular a,c,b for blst")
    p.add_argument("--density", type=float, default=0.5, help="target density for st")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--skip-trivial", action="store_true", help="drop vertex-optimal instances")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench", help="run variants over instances and write reports")
    p.add_argument("instances", nargs="+", help="instance files or directories")
    p.add_argument("--variants", default=None, help="comma-separated labels (default: all eight)")
    p.add_argument("--out-dir", default=None)
    add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("profile", help="performance profile from a bench records.csv")
    p.add_argument("--records", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--plot", default=None, help="write a chart (requires matplotlib)")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("stableset", help="stable set number via ILP and the QP reduction")
    p.add_argument("graph", help="DIMACS edge-format file")
    p.add_argument("--complement", action="store_true", help="complement the parsed graph first")
    p.add_argument("--formulation", choices=("milp1", "milp2"), default=None)
    p.add_argument("--bound", choices=("l1", "l2"), default=None)
    p.add_argument("--vi", action="store_true", default=None)
    add_common(p)
    p.set_defaults(func=cmd_stableset)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_PARSE
    try:
        return ns.func(ns)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except Exception as exc:  # internal failure
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

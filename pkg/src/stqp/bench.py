"""Benchmark harness: run variants over instances, summarize, and profile.

A variant label is ``milp{1,2}-l{1,2}`` with optional ``-vi`` suffix, or
``oracle``.  The full pipeline per (instance, variant): vertex preprocessing,
bound computation (the semidefinite bound is computed once per instance and
its seconds recorded separately), model build, optional convexity cuts,
branch and bound.

``summarize`` mirrors the usual experiment tables: per variant, total wall
seconds, counts of optimal/time-limit outcomes, and the average gap over
time-limited records only (blank when there are none).  The semidefinite
bound appears as its own ``dnn`` pseudo-variant row.  ``performance_profile``
computes, per variant, the fraction of instances solved within a factor tau
of the best variant time, over instances solved by at least one variant.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .bounds import BoundCertificate, SplittingConfig, big_m, lb1, lb2
from .core import SolveStatus, StqpInstance, preprocess_trivial
from .graph import build_convexity_graph, oracle_solve, valid_inequality_pairs
from .milp import add_valid_inequalities, build_milp1, build_milp2
from .solver import SolverConfig, solve_milp

ALL_VARIANTS = (
    "milp1-l1",
    "milp1-l1-vi",
    "milp1-l2",
    "milp1-l2-vi",
    "milp2-l1",
    "milp2-l1-vi",
    "milp2-l2",
    "milp2-l2-vi",
)


@dataclass(frozen=True)
class FormulationConfig:
    """Parsed variant: which model, which bound, cuts or not."""

    formulation: str  # "milp1" | "milp2"
    bound_kind: str  # "l1" | "l2"
    use_vi: bool

    @property
    def label(self) -> str:
        return f"{self.formulation}-{self.bound_kind}" + ("-vi" if self.use_vi else "")

    @classmethod
    def parse(cls, label: str) -> "FormulationConfig":
        parts = label.lower().split("-")
        if (
            len(parts) not in (2, 3)
            or parts[0] not in ("milp1", "milp2")
            or parts[1] not in ("l1", "l2")
            or (len(parts) == 3 and parts[2] != "vi")
        ):
            raise ValueError(f"unknown variant label {label!r}")
        return cls(parts[0], parts[1], len(parts) == 3)


@dataclass(frozen=True)
class BenchRecord:
    instance: str
    variant: str
    status: str
    value: float
    bound: float
    gap: float
    wall_s: float
    nodes: int
    bound_s: float  # seconds spent on the semidefinite bound (0 for l1/oracle)


@dataclass(frozen=True)
class ProfilePoint:
    variant: str
    tau: float
    fraction: float


def solve_variant(
    inst: StqpInstance,
    label: str,
    cfg: SolverConfig | None = None,
    lb2_cache: dict | None = None,
    splitting: SplittingConfig | None = None,
) -> BenchRecord:
    """Run one variant on one instance and record the outcome."""
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    if label.lower() == "oracle":
        sol = oracle_solve(inst)
        return BenchRecord(
            inst.name, "oracle", sol.status.value, sol.value, sol.best_bound,
            sol.gap, time.perf_counter() - t0, 0, 0.0,
        )
    fc = FormulationConfig.parse(label)
    trivial = preprocess_trivial(inst)
    if trivial is not None:
        return BenchRecord(
            inst.name, fc.label, trivial.status.value, trivial.value,
            trivial.best_bound, trivial.gap, time.perf_counter() - t0, 0, 0.0,
        )
    bound_s = 0.0
    if fc.bound_kind == "l2":
        if lb2_cache is not None and inst.name in lb2_cache:
            lb = lb2_cache[inst.name]
        else:
            lb = lb2(inst, splitting)
            if lb2_cache is not None:
                lb2_cache[inst.name] = lb
        bound_s = lb.seconds
    else:
        lb = lb1(inst)
    bigm = big_m(inst, lb)
    build = build_milp1 if fc.formulation == "milp1" else build_milp2
    model = build(inst, lb, bigm)
    if fc.use_vi:
        graph = build_convexity_graph(inst)
        model = add_valid_inequalities(model, valid_inequality_pairs(graph))
    t1 = time.perf_counter()
    sol = solve_milp(inst, model, cfg)
    return BenchRecord(
        inst.name, fc.label, sol.status.value, sol.value, sol.best_bound,
        sol.gap, time.perf_counter() - t1, sol.stats.nodes, bound_s,
    )


def bench_run(
    instances,
    variants=ALL_VARIANTS,
    cfg: SolverConfig | None = None,
    splitting: SplittingConfig | None = None,
    on_record=None,
) -> list[BenchRecord]:
    """Cartesian product of instances and variants; failures become records.

    Returns exactly len(instances) * len(variants) records, in instance-major
    order.  A crash inside one run is recorded with status "error" and the
    sweep continues.
    """
    records = []
    lb2_cache: dict = {}
    for inst in instances:
        for label in variants:
            try:
                rec = solve_variant(inst, label, cfg, lb2_cache, splitting)
            except Exception:
                rec = BenchRecord(
                    inst.name, label.lower(), SolveStatus.ERROR.value,
                    math.nan, math.nan, math.nan, 0.0, 0, 0.0,
                )
            records.append(rec)
            if on_record is not None:
                on_record(rec)
    return records


# ---------------------------------------------------------------------------
# reports


CSV_FIELDS = ("instance", "variant", "status", "value", "bound", "gap", "wall_s", "nodes", "bound_s")
TIME_FIELDS = ("wall_s", "bound_s")


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        row = asdict(rec)
        writer.writerow({k: repr(row[k]) if isinstance(row[k], float) else row[k] for k in CSV_FIELDS})
    return buf.getvalue()


def records_from_csv(text: str) -> list[BenchRecord]:
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for row in reader:
        out.append(
            BenchRecord(
                instance=row["instance"],
                variant=row["variant"],
                status=row["status"],
                value=float(row["value"]),
                bound=float(row["bound"]),
                gap=float(row["gap"]),
                wall_s=float(row["wall_s"]),
                nodes=int(row["nodes"]),
                bound_s=float(row["bound_s"]),
            )
        )
    return out


def records_to_json(records, meta: dict | None = None) -> str:
    payload = {"meta": meta or {}, "records": [asdict(r) for r in records]}
    return json.dumps(payload, indent=1) + "\n"


def summarize(records) -> list[dict]:
    """Per-variant totals plus a ``dnn`` row for the semidefinite bound time.

    ``avg_gap`` averages the gap over time-limited records only and is None
    when a variant has none.
    """
    variants = []
    for rec in records:
        if rec.variant not in variants:
            variants.append(rec.variant)
    rows = []
    for variant in variants:
        group = [r for r in records if r.variant == variant]
        tl = [r for r in group if r.status == SolveStatus.TIME_LIMIT.value]
        rows.append(
            {
                "variant": variant,
                "instances": len(group),
                "total_wall_s": sum(r.wall_s for r in group),
                "optimal": sum(1 for r in group if r.status == SolveStatus.OPTIMAL.value),
                "time_limit": len(tl),
                "error": sum(1 for r in group if r.status == SolveStatus.ERROR.value),
                "avg_gap": (sum(r.gap for r in tl) / len(tl)) if tl else None,
                "total_nodes": sum(r.nodes for r in group),
            }
        )
    dnn: dict[str, float] = {}
    for rec in records:
        if rec.bound_s > 0.0:
            dnn[rec.instance] = max(dnn.get(rec.instance, 0.0), rec.bound_s)
    if dnn:
        rows.append(
            {
                "variant": "dnn",
                "instances": len(dnn),
                "total_wall_s": sum(dnn.values()),
                "optimal": len(dnn),
                "time_limit": 0,
                "error": 0,
                "avg_gap": None,
                "total_nodes": 0,
            }
        )
    return rows


def render_summary(rows) -> str:
    headers = ["variant", "instances", "optimal", "time_limit", "error", "total_wall_s", "avg_gap", "total_nodes"]
    table = [headers]
    for row in rows:
        table.append(
            [
                str(row["variant"]),
                str(row["instances"]),
                str(row["optimal"]),
                str(row["time_limit"]),
                str(row["error"]),
                f"{row['total_wall_s']:.3f}",
                "" if row["avg_gap"] is None else f"{row['avg_gap']:.3e}",
                str(row["total_nodes"]),
            ]
        )
    widths = [max(len(r[k]) for r in table) for k in range(len(headers))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in table]
    return "\n".join(lines)


def performance_profile(records) -> list[ProfilePoint]:
    """Cumulative time-ratio distribution per variant.

    An instance counts as solved by a variant when the record status is
    optimal; instances solved by no variant are excluded.  Unsolved ratios
    are infinite, so a variant's curve tops out at its solved fraction.
    """
    variants = []
    instances = []
    for rec in records:
        if rec.variant not in variants:
            variants.append(rec.variant)
        if rec.instance not in instances:
            instances.append(rec.instance)
    times: dict[tuple[str, str], float] = {}
    for rec in records:
        if rec.status == SolveStatus.OPTIMAL.value:
            times[(rec.instance, rec.variant)] = rec.wall_s
    included = [
        inst for inst in instances if any((inst, v) in times for v in variants)
    ]
    if not included:
        return []
    ratios: dict[str, list[float]] = {v: [] for v in variants}
    for inst in included:
        best = min(times[(inst, v)] for v in variants if (inst, v) in times)
        best = max(best, 1e-12)
        for v in variants:
            if (inst, v) in times:
                ratios[v].append(max(1.0, times[(inst, v)] / best))
            else:
                ratios[v].append(math.inf)
    taus = sorted({r for rs in ratios.values() for r in rs if math.isfinite(r)})
    points = []
    total = len(included)
    for v in variants:
        arr = np.asarray(ratios[v])
        for tau in taus:
            points.append(ProfilePoint(v, tau, float(np.sum(arr <= tau)) / total))
    return points


def profile_to_csv(points) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["variant", "tau", "fraction"])
    for p in points:
        writer.writerow([p.variant, repr(p.tau), repr(p.fraction)])
    return buf.getvalue()


def plot_profile(points, path) -> None:
    """Optional static chart; needs matplotlib installed."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    by_variant: dict[str, list[ProfilePoint]] = {}
    for p in points:
        by_variant.setdefault(p.variant, []).append(p)
    fig, ax = plt.subplots(figsize=(7, 5))
    for variant, pts in by_variant.items():
        pts = sorted(pts, key=lambda p: p.tau)
        ax.step([p.tau for p in pts], [p.fraction for p in pts], where="post", label=variant)
    ax.set_xlabel("time ratio to best variant")
    ax.set_ylabel("fraction of instances solved")
    ax.set_ylim(0.0, 1.05)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

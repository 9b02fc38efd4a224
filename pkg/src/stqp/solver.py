"""Branch-and-bound over the binary support variables of a MilpModel.

The search relaxes integrality, branches on a fractional binary (most
fractional by default, smallest index on ties, the 1-branch explored first)
and prunes on node LP bounds against the incumbent.  Node selection is
best-bound by default; child nodes are keyed by their parent's bound and
solved lazily, warm-started from the parent basis.

For instance-backed models an incumbent heuristic lifts the LP point: it
solves the stationarity system on the support of the relaxed x and, when the
result is nonnegative, yields a feasible point whose objective usually equals
the leaf value the tree would reach much later.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import (
    SolveStats,
    SolveStatus,
    StqpInstance,
    StqpSolution,
    evaluate,
    gap_value,
    lift_support_point,
    make_solution,
    support_kkt,
)
from .milp import BINARY, MilpModel
from .simplex import LpBasis, LpResult, LpStatus, StandardLp, solve_lp

BEST_BOUND = "best-bound"
DEPTH_FIRST = "depth-first"
MOST_FRACTIONAL = "most-fractional"
MAX_PSEUDOCOST = "max-pseudocost"


class NoFractional(ValueError):
    """branch_select was called on an integral point."""


@dataclass
class SolverConfig:
    gap_tol: float = 1e-6
    time_limit_s: float = 3600.0
    node_selection: str = BEST_BOUND
    branching: str = MOST_FRACTIONAL
    deterministic: bool = True
    workers: int = 1
    int_tol: float = 1e-9
    heuristic_support_tol: float = 1e-4
    node_limit: int | None = None


@dataclass
class BnbNode:
    fixings: dict[int, float]
    parent_bound: float
    depth: int
    basis: LpBasis | None = None
    branch_var: int = -1
    branch_dir: int = -1
    parent_frac: float = 0.5  # fraction moved by the branch, for pseudocosts


@dataclass
class MilpResult:
    """Raw outcome of the tree search on a model."""

    status: SolveStatus
    objective: float
    bound: float
    gap: float
    values: np.ndarray | None  # best integer-feasible leaf assignment, if any
    stats: SolveStats = field(default_factory=SolveStats)
    payload: object = None  # best incumbent payload from callbacks


def branch_select(y_values, int_tol: float = 1e-9, pseudocost=None) -> int:
    """Index (within y_values) of the branching variable.

    Most-fractional with smallest-index tie break; with ``pseudocost`` given
    (score array aligned with y_values) the largest score wins among
    fractional candidates.  Raises NoFractional when everything is integral.
    """
    y = np.asarray(y_values, dtype=float)
    frac = np.minimum(y, 1.0 - y)
    candidates = np.flatnonzero(frac > int_tol)
    if candidates.size == 0:
        raise NoFractional("no fractional entry")
    if pseudocost is not None:
        scores = np.asarray(pseudocost, dtype=float)[candidates]
        return int(candidates[np.argmax(scores)])
    return int(candidates[np.argmax(frac[candidates])])


class _Pseudocost:
    """Average objective gain per unit fraction, tracked per (var, direction)."""

    def __init__(self, cols):
        self.sum = {(c, d): 0.0 for c in cols for d in (0, 1)}
        self.count = {(c, d): 0 for c in cols for d in (0, 1)}

    def update(self, col: int, direction: int, gain: float, frac: float):
        if frac <= 1e-12:
            return
        self.sum[(col, direction)] += max(gain, 0.0) / frac
        self.count[(col, direction)] += 1

    def estimate(self, col: int, direction: int, default: float) -> float:
        c = self.count[(col, direction)]
        return self.sum[(col, direction)] / c if c else default

    def scores(self, cols, values):
        inits = [v / c for (_, v), c in zip(self.sum.items(), self.count.values()) if c]
        default = float(np.mean(inits)) if inits else 1.0
        out = np.empty(len(cols))
        for k, col in enumerate(cols):
            f1 = 1.0 - values[k]
            f0 = values[k]
            up = self.estimate(col, 1, default) * max(f1, 1e-6)
            dn = self.estimate(col, 0, default) * max(f0, 1e-6)
            out[k] = up * dn
        return out


def minimize(
    model: MilpModel,
    cfg: SolverConfig | None = None,
    heuristic=None,
    leaf_value=None,
) -> MilpResult:
    """Tree search for the model minimum.

    ``heuristic(values) -> (obj, payload) | None`` may propose incumbents from
    any node relaxation; ``leaf_value(values) -> (obj, payload)`` converts an
    integral leaf into an incumbent (defaults to the LP objective and values).
    """
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    std = StandardLp(model)
    binary_cols = [i for i, v in enumerate(model.variables) if v.kind == BINARY]
    pseudo = _Pseudocost(binary_cols) if cfg.branching == MAX_PSEUDOCOST else None

    inc_obj = math.inf
    inc_payload = None
    leaf_values: np.ndarray | None = None  # best integer-feasible assignment
    leaf_obj = math.inf
    nodes = 0
    lp_count = 0
    counter = itertools.count()
    best_first = cfg.node_selection != DEPTH_FIRST
    heap: list = []

    def push(node: BnbNode):
        if best_first:
            heapq.heappush(heap, (node.parent_bound, next(counter), node))
        else:
            heap.append((node.parent_bound, next(counter), node))

    def pop() -> tuple[float, BnbNode]:
        if best_first:
            bound, _, node = heapq.heappop(heap)
        else:
            bound, _, node = heap.pop()
        return bound, node

    def open_bound() -> float:
        if not heap:
            return math.inf
        if best_first:
            return heap[0][0]
        return min(entry[0] for entry in heap)

    def elapsed() -> float:
        return time.perf_counter() - t0

    def take_incumbent(obj: float, payload):
        nonlocal inc_obj, inc_payload
        if obj < inc_obj - 1e-14:
            inc_obj = obj
            inc_payload = payload

    push(BnbNode(fixings={}, parent_bound=-math.inf, depth=0))
    status = SolveStatus.OPTIMAL
    root_infeasible = False
    hit_time = False

    while heap:
        current_gap = gap_value(inc_obj, min(open_bound(), inc_obj))
        if math.isfinite(inc_obj) and current_gap <= cfg.gap_tol:
            break
        if elapsed() > cfg.time_limit_s:
            hit_time = True
            break
        if cfg.node_limit is not None and nodes >= cfg.node_limit:
            hit_time = True
            break
        parent_bound, node = pop()
        if parent_bound >= inc_obj - 1e-12:
            if best_first:
                heap.clear()
            continue
        lo, up = std.bounds_with_fixings(node.fixings)
        res = solve_lp(std, bounds=(lo, up), warm=node.basis)
        lp_count += 1
        nodes += 1
        if res.status == LpStatus.INFEASIBLE:
            if node.depth == 0:
                root_infeasible = True
            continue
        if res.status == LpStatus.UNBOUNDED:
            raise RuntimeError("relaxation unbounded; model is malformed")
        bound = max(res.objective, node.parent_bound)
        if pseudo is not None and node.branch_var >= 0:
            pseudo.update(
                node.branch_var, node.branch_dir, bound - node.parent_bound, node.parent_frac
            )
        if bound >= inc_obj - 1e-12:
            continue
        values = res.x
        y = values[binary_cols] if binary_cols else np.empty(0)
        if heuristic is not None:
            got = heuristic(values)
            if got is not None:
                obj, payload = got
                take_incumbent(obj, payload)
        try:
            pick = branch_select(
                y,
                cfg.int_tol,
                pseudocost=pseudo.scores(binary_cols, y) if pseudo else None,
            )
        except NoFractional:
            if leaf_value is not None:
                obj, payload = leaf_value(values)
            else:
                obj, payload = res.objective, None
            if obj < leaf_obj:
                leaf_obj = obj
                leaf_values = np.asarray(values, dtype=float).copy()
            take_incumbent(obj, payload)
            continue
        if bound >= inc_obj - 1e-12:
            continue
        col = binary_cols[pick]
        y_val = float(y[pick])
        children = []
        for direction in (1, 0):
            fixings = dict(node.fixings)
            fixings[col] = float(direction)
            child = BnbNode(
                fixings=fixings,
                parent_bound=bound,
                depth=node.depth + 1,
                basis=res.basis,
                branch_var=col,
                branch_dir=direction,
                parent_frac=(1.0 - y_val) if direction == 1 else y_val,
            )
            children.append(child)
        if best_first:
            for child in children:
                push(child)  # 1-branch first via the push counter
        else:
            push(children[1])
            push(children[0])  # popped first: 1-branch

    wall = elapsed()
    if root_infeasible and not math.isfinite(inc_obj):
        return MilpResult(
            SolveStatus.INFEASIBLE_MODEL,
            math.inf,
            math.inf,
            math.inf,
            None,
            SolveStats(nodes, lp_count, wall),
        )
    if hit_time:
        bound_final = min(open_bound(), inc_obj)
        return MilpResult(
            SolveStatus.TIME_LIMIT,
            inc_obj,
            bound_final,
            gap_value(inc_obj, bound_final),
            leaf_values,
            SolveStats(nodes, lp_count, wall),
            inc_payload,
        )
    bound_final = min(open_bound(), inc_obj)
    gap = gap_value(inc_obj, bound_final)
    if not heap:
        bound_final, gap = inc_obj, 0.0
    return MilpResult(
        SolveStatus.OPTIMAL,
        inc_obj,
        bound_final,
        gap,
        leaf_values,
        SolveStats(nodes, lp_count, wall),
        inc_payload,
    )


def incumbent_heuristic(
    inst: StqpInstance, model: MilpModel, lp_values, support_tol: float = 1e-4
):
    """Lift an LP relaxation point to a feasible candidate.

    Takes the support of the relaxed x (entries above ``support_tol``), solves
    the stationarity system there, and if the solution is (numerically)
    nonnegative returns it with its exact objective.  Fractional magnitudes do
    not matter, only the support.  Falls back to clip-and-renormalize.
    Returns (x, value, lifted) or None.
    """
    x_idx = model.role("x")
    x_lp = np.asarray(lp_values, dtype=float)[list(x_idx)]
    support = np.flatnonzero(x_lp > support_tol)
    if support.size:
        res = support_kkt(inst.q, support)
        if res is not None:
            u, _lam = res
            if float(np.min(u)) >= -1e-12:
                x = lift_support_point(inst.n, support, u)
                return x, evaluate(inst, x), True
    clipped = np.maximum(x_lp, 0.0)
    total = float(np.sum(clipped))
    if total <= 1e-12:
        return None
    x = clipped / total
    return x, evaluate(inst, x), False


def _greedy_support_incumbent(inst: StqpInstance, starts: int = 12):
    """Grow small supports greedily through exact stationarity solves.

    Seeds from the best interior segment minima (pairs with a strictly
    convex restriction), then repeatedly adds the vertex that lowers the
    supported KKT value, keeping every intermediate multiplier nonnegative.
    Returns (x, value, True) for the best point found.
    """
    q = inst.q
    n = inst.n
    diag = np.diag(q)
    j0 = int(np.argmin(diag))
    best_x = np.zeros(n)
    best_x[j0] = 1.0
    best_val = float(diag[j0])

    pair_vals = []
    for i in range(n - 1):
        for j in range(i + 1, n):
            disc = q[i, i] + q[j, j] - 2.0 * q[i, j]
            if disc <= 0.0:
                continue
            u = (q[j, j] - q[i, j]) / disc
            if u <= 0.0 or u >= 1.0:
                continue
            val = (q[i, i] * q[j, j] - q[i, j] * q[i, j]) / disc
            pair_vals.append((val, (i, j)))
    pair_vals.sort()

    seen: set = set()
    for _, support in pair_vals[:starts]:
        support = list(support)
        res = support_kkt(q, support)
        if res is None or float(np.min(res[0])) < -1e-12:
            continue
        u, val = res
        improved = True
        while improved and len(support) < n:
            improved = False
            key = tuple(support)
            if key in seen:
                break
            seen.add(key)
            pick = None
            for v in range(n):
                if v in support:
                    continue
                trial = support_kkt(q, support + [v])
                if trial is None or float(np.min(trial[0])) < -1e-12:
                    continue
                if trial[1] < val - 1e-14:
                    pick, (u, val) = v, trial
            if pick is not None:
                support.append(pick)
                improved = True
        if val < best_val:
            best_val = val
            best_x = np.zeros(n)
            # support_kkt orders u by sorted support index
            best_x[np.asarray(sorted(support))] = np.maximum(u, 0.0)
            best_x /= best_x.sum()
    return best_x, evaluate(inst, best_x), True


def _replicator_polish(q: np.ndarray, x0, iters: int = 300) -> np.ndarray:
    """Deterministic local descent on the simplex.

    Runs multiplicative updates on the positive complement matrix
    c*E - Q (which turns minimization of x'Qx into a monotone ascent),
    starting from ``x0`` clipped onto the simplex.
    """
    n = q.shape[0]
    comp = (float(np.max(q)) + 1.0) - q
    x = np.maximum(np.asarray(x0, dtype=float), 0.0)
    total = float(np.sum(x))
    x = np.full(n, 1.0 / n) if total <= 1e-12 else x / total
    for _ in range(iters):
        g = comp @ x
        denom = float(x @ g)
        if denom <= 0.0:
            break
        x_new = x * (g / denom)
        if float(np.max(np.abs(x_new - x))) < 1e-13:
            return x_new
        x = x_new
    return x


def _support_candidates(inst: StqpInstance, x: np.ndarray):
    """Exact feasible candidates from thresholded supports of a simplex point.

    Yields (x_exact, value, True) for every support whose stationarity
    system solves nonnegatively, plus the raw point itself as a fallback.
    """
    peak = float(np.max(x))
    seen = set()
    for frac in (1e-8, 1e-5, 1e-3, 1e-2, 0.1):
        support = np.flatnonzero(x > frac * peak)
        key = tuple(support.tolist())
        if not key or key in seen:
            continue
        seen.add(key)
        res = support_kkt(inst.q, support)
        if res is None:
            continue
        u, _lam = res
        if float(np.min(u)) >= -1e-12:
            lifted = lift_support_point(inst.n, support, u)
            yield lifted, evaluate(inst, lifted), True
    yield x, evaluate(inst, x), False


def solve_milp(inst: StqpInstance, model: MilpModel, cfg: SolverConfig | None = None) -> StqpSolution:
    """Solve an instance through one of its MILP models, returning the point.

    The reported value is the recomputed objective of the returned feasible
    point; the bound and gap come from the tree.  Node relaxations feed two
    incumbent sources: the support-lifting heuristic and a multiplicative
    local descent, both deterministic.
    """
    cfg = cfg or SolverConfig()
    x_idx = list(model.role("x"))
    root_seeded = False

    def descent_candidates(seed):
        polished = _replicator_polish(inst.q, seed)
        return list(_support_candidates(inst, polished))

    def heuristic(values):
        candidates = []
        got = incumbent_heuristic(inst, model, values, cfg.heuristic_support_tol)
        if got is not None:
            candidates.append(got)
        x_lp = np.asarray(values, dtype=float)[x_idx]
        candidates.extend(descent_candidates(x_lp))
        nonlocal root_seeded
        if not root_seeded:
            root_seeded = True
            candidates.extend(descent_candidates(np.full(inst.n, 1.0 / inst.n)))
            greedy = _greedy_support_incumbent(inst)
            candidates.append(greedy)
            mixed = 0.9 * greedy[0] + 0.1 / inst.n
            candidates.extend(descent_candidates(mixed))
        if not candidates:
            return None
        x, val, lifted = min(candidates, key=lambda c: c[1])
        return val, (x, lifted)

    def leaf_value(values):
        x_raw = np.maximum(np.asarray(values, dtype=float)[x_idx], 0.0)
        total = float(np.sum(x_raw))
        if total <= 1e-12:
            return math.inf, None
        x = x_raw / total
        return evaluate(inst, x), (x, True)

    res = minimize(model, cfg, heuristic=heuristic, leaf_value=leaf_value)
    if res.payload is None:
        if res.status == SolveStatus.OPTIMAL:
            res = MilpResult(
                SolveStatus.ERROR, res.objective, res.bound, res.gap, res.values, res.stats
            )
        return StqpSolution(
            None, math.inf, (), None, res.status, res.bound, math.inf, res.stats
        )
    x, lifted = res.payload
    if not lifted:
        support = np.flatnonzero(x > 1e-8)
        polished = support_kkt(inst.q, support)
        if polished is not None and float(np.min(polished[0])) >= -1e-12:
            x_pol = lift_support_point(inst.n, support, polished[0])
            if evaluate(inst, x_pol) <= evaluate(inst, x) + 1e-12:
                x = x_pol
    sol = make_solution(inst, x, res.status, res.bound, res.stats)
    sol.gap = res.gap
    return sol

"""Dense bounded-variable revised simplex over MilpModel relaxations.

The model is normalized once into equality standard form (slack column per
inequality row); each solve then takes lower/upper bound vectors, so branch
fixings are plain bound changes.  Phase 1 minimizes the total artificial
infeasibility from an all-artificial basis; phase 2 runs Dantzig pricing with
a switch to Bland's rule after a run of degenerate pivots.  The basis inverse
is kept explicitly and rebuilt every ``REFACTOR_EVERY`` pivots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .milp import EQ, GE, LE, MilpModel

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9
REFACTOR_EVERY = 50

AT_LOWER = np.uint8(0)
AT_UPPER = np.uint8(1)
IN_BASIS = np.uint8(2)
AT_FREE = np.uint8(3)


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpNumericalError(RuntimeError):
    """The simplex lost feasibility or exceeded its iteration budget."""


@dataclass
class LpBasis:
    """Warm-start token: basic column ids plus nonbasic statuses."""

    basic: np.ndarray
    status: np.ndarray


@dataclass
class LpResult:
    status: LpStatus
    objective: float
    x: np.ndarray | None  # structural variable values
    basis: LpBasis | None
    iterations: int = 0


class StandardLp:
    """Equality-form data A v = b with bounds, built once per model."""

    def __init__(self, model: MilpModel):
        nstruct = len(model.variables)
        rows = model.constraints
        m = len(rows)
        nslack = sum(1 for r in rows if r.relation != EQ)
        ncols = nstruct + nslack
        a = np.zeros((m, ncols))
        b = np.zeros(m)
        lo = np.empty(ncols)
        up = np.empty(ncols)
        for j, v in enumerate(model.variables):
            lo[j] = v.lower
            up[j] = v.upper
        slack = nstruct
        for i, row in enumerate(rows):
            sign = -1.0 if row.relation == GE else 1.0  # normalize >= to <=
            for idx, coef in row.coeffs:
                a[i, idx] = sign * coef
            b[i] = sign * row.rhs
            if row.relation != EQ:
                a[i, slack] = 1.0
                lo[slack] = 0.0
                up[slack] = math.inf
                slack += 1
        c = np.zeros(ncols)
        for idx, coef in model.objective:
            c[idx] += coef
        self.model = model
        self.a = a
        self.b = b
        self.c = c
        self.lo = lo
        self.up = up
        self.m = m
        self.ncols = ncols
        self.nstruct = nstruct

    def bounds_with_fixings(self, fixings: dict[int, float] | None = None):
        lo = self.lo.copy()
        up = self.up.copy()
        if fixings:
            for idx, val in fixings.items():
                lo[idx] = up[idx] = float(val)
        return lo, up


class _Simplex:
    def __init__(self, std: StandardLp, lo: np.ndarray, up: np.ndarray):
        m, ncols = std.m, std.ncols
        self.std = std
        self.nall = ncols + m  # artificial column i is e_i
        self.a = np.hstack([std.a, np.eye(m)])
        self.lo = np.concatenate([lo, np.zeros(m)])
        self.up = np.concatenate([up, np.zeros(m)])
        self.b = std.b
        self.m = m
        self.ncols = ncols
        self.status = np.full(self.nall, AT_LOWER, dtype=np.uint8)
        self.basic = np.arange(ncols, ncols + m)
        self.binv = np.eye(m)
        self.xb = np.zeros(m)
        self.pivots = 0
        self.iterations = 0
        self.degenerate_run = 0
        self.bland = False
        self.max_iter = 5000 + 60 * (m + ncols)

    # -- values -------------------------------------------------------------

    def nonbasic_values(self) -> np.ndarray:
        v = np.where(self.status == AT_UPPER, self.up, self.lo)
        v[~np.isfinite(v)] = 0.0
        v[self.status == AT_FREE] = 0.0
        v[self.status == IN_BASIS] = 0.0
        return v

    def full_values(self) -> np.ndarray:
        v = self.nonbasic_values()
        v[self.basic] = self.xb
        return v

    def recompute_xb(self):
        v = self.nonbasic_values()
        rhs = self.b - self.a @ v
        self.xb = self.binv @ rhs

    def refactor(self):
        bmat = self.a[:, self.basic]
        try:
            self.binv = np.linalg.inv(bmat)
        except np.linalg.LinAlgError as exc:
            raise LpNumericalError("singular basis") from exc
        self.recompute_xb()

    # -- setup --------------------------------------------------------------

    def cold_start(self):
        ncols = self.ncols
        finite_lo = np.isfinite(self.lo[:ncols])
        finite_up = np.isfinite(self.up[:ncols])
        st = np.where(finite_lo, AT_LOWER, np.where(finite_up, AT_UPPER, AT_FREE))
        self.status[:ncols] = st
        self.status[ncols:] = AT_LOWER
        v = self.nonbasic_values()
        r = self.b - self.a[:, :ncols] @ v[:ncols]
        # Artificial columns are +e_i; a negative residual needs bounds
        # (-inf, 0] so the artificial can carry it.
        self.art_sign = np.where(r >= 0.0, 1.0, -1.0)
        self.lo[ncols:] = np.where(r >= 0.0, 0.0, -math.inf)
        self.up[ncols:] = np.where(r >= 0.0, math.inf, 0.0)
        self.basic = np.arange(ncols, ncols + self.m)
        self.status[self.basic] = IN_BASIS
        self.binv = np.eye(self.m)
        self.xb = r.copy()

    def try_warm_start(self, basis: LpBasis) -> bool:
        if basis.basic.shape[0] != self.m or basis.status.shape[0] != self.nall:
            return False
        self.basic = basis.basic.copy()
        self.status = basis.status.copy()
        # Stored artificials stay fixed at zero.
        self.lo[self.ncols :] = 0.0
        self.up[self.ncols :] = 0.0
        nonbasic_mask = np.ones(self.nall, dtype=bool)
        nonbasic_mask[self.basic] = False
        # A nonbasic variable must sit on a finite bound (or be free).
        st = self.status
        bad = nonbasic_mask & (
            ((st == AT_LOWER) & ~np.isfinite(self.lo))
            | ((st == AT_UPPER) & ~np.isfinite(self.up))
        )
        if np.any(bad):
            return False
        try:
            self.refactor()
        except LpNumericalError:
            return False
        tol = FEAS_TOL * (1.0 + float(np.max(np.abs(self.b))) if self.m else 1.0)
        lo_b = self.lo[self.basic]
        up_b = self.up[self.basic]
        return bool(np.all(self.xb >= lo_b - tol) and np.all(self.xb <= up_b + tol))

    # -- core iteration -----------------------------------------------------

    def _price(self, cost: np.ndarray, allow: np.ndarray):
        yrow = cost[self.basic] @ self.binv
        d = cost - yrow @ self.a
        st = self.status
        movable = allow & (st != IN_BASIS) & (self.up - self.lo > 0)
        viol = np.where(
            st == AT_LOWER, -d, np.where(st == AT_UPPER, d, np.abs(d))
        )
        viol[~movable] = -math.inf
        if self.bland:
            eligible = np.flatnonzero(viol > PIVOT_TOL)
            if eligible.size == 0:
                return -1, 0.0
            j = int(eligible[0])
        else:
            j = int(np.argmax(viol))
            if viol[j] <= PIVOT_TOL:
                return -1, 0.0
        sigma = 1.0 if (st[j] == AT_LOWER or (st[j] == AT_FREE and d[j] < 0)) else -1.0
        return j, sigma

    def _ratio_test(self, j: int, sigma: float, w: np.ndarray):
        delta = sigma * w  # basic values move by -delta * t
        lo_b = self.lo[self.basic]
        up_b = self.up[self.basic]
        ratios = np.full(self.m, math.inf)
        dec = delta > PIVOT_TOL
        inc = delta < -PIVOT_TOL
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios[dec] = (self.xb[dec] - lo_b[dec]) / delta[dec]
            ratios[inc] = (up_b[inc] - self.xb[inc]) / (-delta[inc])
        ratios = np.maximum(ratios, 0.0)
        t_basic = float(np.min(ratios)) if self.m else math.inf
        span = self.up[j] - self.lo[j]
        t_flip = float(span) if math.isfinite(span) else math.inf
        if t_basic == math.inf and t_flip == math.inf:
            return None  # unbounded direction
        if t_flip <= t_basic:
            return ("flip", t_flip, -1)
        near = np.flatnonzero(ratios <= t_basic * (1.0 + 1e-9) + 1e-15)
        r = int(near[np.argmax(np.abs(delta[near]))]) if near.size else int(np.argmin(ratios))
        return ("pivot", float(ratios[r]), r)

    def _apply_pivot(self, j: int, sigma: float, w: np.ndarray, t: float, r: int):
        enter_val = (self.lo[j] if self.status[j] == AT_LOWER else self.up[j]) if self.status[j] != AT_FREE else 0.0
        enter_val += sigma * t
        self.xb = self.xb - sigma * t * w
        leaving = int(self.basic[r])
        # Classify which bound the leaving variable reached.
        dist_lo = abs(self.xb[r] - self.lo[leaving]) if math.isfinite(self.lo[leaving]) else math.inf
        dist_up = abs(self.xb[r] - self.up[leaving]) if math.isfinite(self.up[leaving]) else math.inf
        self.status[leaving] = AT_LOWER if dist_lo <= dist_up else AT_UPPER
        pr = w[r]
        if abs(pr) < PIVOT_TOL:
            raise LpNumericalError("tiny pivot element")
        self.binv[r, :] /= pr
        others = np.arange(self.m) != r
        self.binv[others, :] -= np.outer(w[others], self.binv[r, :])
        self.basic[r] = j
        self.status[j] = IN_BASIS
        self.xb[r] = enter_val
        self.pivots += 1
        if self.pivots % REFACTOR_EVERY == 0:
            self.refactor()

    def run_phase(self, cost: np.ndarray, allow: np.ndarray):
        m = self.m
        while True:
            self.iterations += 1
            if self.iterations > self.max_iter:
                raise LpNumericalError("iteration budget exceeded")
            j, sigma = self._price(cost, allow)
            if j < 0:
                return LpStatus.OPTIMAL
            w = self.binv @ self.a[:, j]
            step = self._ratio_test(j, sigma, w)
            if step is None:
                return LpStatus.UNBOUNDED
            kind, t, r = step
            if t <= 1e-11:
                self.degenerate_run += 1
                if self.degenerate_run > 10 * m and not self.bland:
                    self.bland = True
            else:
                self.degenerate_run = 0
            if kind == "flip":
                self.xb = self.xb - sigma * t * w
                self.status[j] = AT_UPPER if self.status[j] == AT_LOWER else AT_LOWER
            else:
                self._apply_pivot(j, sigma, w, t, r)

    # -- driver ---------------------------------------------------------------

    def drive_out_artificials(self):
        art_rows = [r for r in range(self.m) if self.basic[r] >= self.ncols]
        for r in art_rows:
            row = self.binv[r, :] @ self.a[:, : self.ncols]
            candidates = np.flatnonzero(
                (np.abs(row) > 1e-7) & (self.status[: self.ncols] != IN_BASIS)
            )
            if candidates.size == 0:
                continue  # redundant row; artificial stays basic at zero
            j = int(candidates[0])
            w = self.binv @ self.a[:, j]
            self._apply_pivot(j, 0.0, w, 0.0, r)

    def solve(self, warm: LpBasis | None):
        ncols = self.ncols
        warm_ok = warm is not None and self.try_warm_start(warm)
        if not warm_ok:
            self.cold_start()
            cost1 = np.zeros(self.nall)
            cost1[ncols:] = np.where(self.lo[ncols:] == 0.0, 1.0, -1.0)
            allow = np.zeros(self.nall, dtype=bool)
            allow[:ncols] = True
            st = self.run_phase(cost1, allow)
            if st == LpStatus.UNBOUNDED:
                raise LpNumericalError("phase 1 unbounded")
            art_total = float(cost1 @ self.full_values())
            scale = 1.0 + float(np.max(np.abs(self.b))) if self.m else 1.0
            if art_total > 1e-7 * scale:
                return LpStatus.INFEASIBLE
            self.drive_out_artificials()
            self.lo[ncols:] = 0.0
            self.up[ncols:] = 0.0
            self.recompute_xb()
        cost2 = np.zeros(self.nall)
        cost2[:ncols] = self.std.c
        allow = np.zeros(self.nall, dtype=bool)
        allow[:ncols] = True
        self.degenerate_run = 0
        return self.run_phase(cost2, allow)


def solve_lp(
    std: StandardLp,
    fixings: dict[int, float] | None = None,
    warm: LpBasis | None = None,
    bounds: tuple[np.ndarray, np.ndarray] | None = None,
) -> LpResult:
    """Solve the LP relaxation with optional bound fixings and warm basis.

    A numerical failure triggers one cold restart from scratch before the
    error propagates.
    """
    lo, up = bounds if bounds is not None else std.bounds_with_fixings(fixings)
    if np.any(lo > up):
        return LpResult(LpStatus.INFEASIBLE, math.inf, None, None)
    attempts = [warm, None] if warm is not None else [None]
    last_exc: Exception | None = None
    for attempt in attempts:
        state = _Simplex(std, lo, up)
        try:
            status = state.solve(attempt)
        except LpNumericalError as exc:
            last_exc = exc
            continue
        if status == LpStatus.INFEASIBLE:
            return LpResult(status, math.inf, None, None, state.iterations)
        if status == LpStatus.UNBOUNDED:
            return LpResult(status, -math.inf, None, None, state.iterations)
        v = state.full_values()
        residual = float(np.max(np.abs(std.a @ v[: std.ncols] - std.b))) if std.m else 0.0
        if residual > FEAS_TOL * (1.0 + float(np.max(np.abs(std.b))) if std.m else 1.0):
            last_exc = LpNumericalError(f"residual {residual} too large")
            continue
        obj = float(std.c @ v[: std.ncols])
        basis = LpBasis(state.basic.copy(), state.status.copy())
        return LpResult(LpStatus.OPTIMAL, obj, v[: std.nstruct].copy(), basis, state.iterations)
    raise last_exc if last_exc is not None else LpNumericalError("unknown failure")


def solve_model_lp(model: MilpModel, fixings: dict[int, float] | None = None) -> LpResult:
    """Convenience: build standard form and solve one relaxation."""
    return solve_lp(StandardLp(model), fixings=fixings)

"""Problem data and first-order machinery for quadratic minimization over the simplex.

The problem throughout is

    nu(Q) = min { x' Q x : x >= 0, sum(x) = 1 }

for a symmetric matrix Q.  Symmetric matrices and simplex vectors are plain
float ndarrays; ``symmetrize`` and ``check_simplex`` are the validating
constructors.  Indices are 0-based everywhere in this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# Feasibility tolerance for simplex membership checks.
TOL_FEAS = 1e-8
# Stationarity/complementarity tolerance for KKT certificates.
TOL_KKT = 1e-6
# Entries above this threshold count as support.
SUPPORT_TOL = 1e-8


class DimensionError(ValueError):
    """Shape mismatch between a matrix and a vector, or a non-square matrix."""


def symmetrize(a, tol: float = 1e-9) -> np.ndarray:
    """Validate a square matrix and return an exactly symmetric float copy.

    The lower triangle is mirrored, so entries (i, j) and (j, i) are the same
    float.  Input whose asymmetry exceeds ``tol`` is rejected rather than
    silently averaged.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        raise DimensionError("empty matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    if np.max(np.abs(a - a.T)) > tol:
        raise ValueError("matrix is not symmetric")
    out = np.tril(a) + np.tril(a, -1).T
    return out


def check_simplex(x, n: int | None = None, tol: float = TOL_FEAS) -> np.ndarray:
    """Validate that ``x`` lies on the unit simplex within ``tol``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {x.shape}")
    if n is not None and x.shape[0] != n:
        raise DimensionError(f"expected length {n}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector entries must be finite")
    if np.min(x) < -tol:
        raise ValueError(f"negative entry {np.min(x)} below -{tol}")
    if abs(float(np.sum(x)) - 1.0) > tol:
        raise ValueError(f"entries sum to {np.sum(x)}, not 1")
    return x


class Origin(str, Enum):
    FILE = "file"
    GENERATED = "generated"
    REDUCED = "reduced-from-graph"


@dataclass(frozen=True)
class StqpInstance:
    """A named symmetric matrix defining one problem instance."""

    q: np.ndarray
    name: str = "instance"
    origin: Origin = Origin.FILE

    def __post_init__(self):
        q = symmetrize(self.q)
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def __eq__(self, other):
        if not isinstance(other, StqpInstance):
            return NotImplemented
        return (
            self.name == other.name
            and self.origin == other.origin
            and self.q.shape == other.q.shape
            and bool(np.array_equal(self.q, other.q))
        )


def evaluate(inst: StqpInstance, x) -> float:
    """Objective value x' Q x for a feasible point."""
    x = check_simplex(x, inst.n)
    return float(x @ inst.q @ x)


@dataclass(frozen=True)
class KktCertificate:
    """First-order certificate for a point on the simplex.

    lambda_ is the multiplier of the simplex constraint, s = Qx - lambda*e the
    multiplier of x >= 0 (exact by construction).  The certificate is valid
    when dual feasibility (s >= 0) and complementarity (x_j s_j = 0) both hold
    within ``tol``.
    """

    lambda_: float
    s: np.ndarray
    dual_violation: float
    comp_violation: float
    tol: float = TOL_KKT

    @property
    def valid(self) -> bool:
        return self.dual_violation <= self.tol and self.comp_violation <= self.tol


def kkt_check(inst: StqpInstance, x, tol: float = TOL_KKT) -> KktCertificate:
    """Build the KKT certificate of ``x``: lambda = x'Qx, s = Qx - lambda*e."""
    x = check_simplex(x, inst.n)
    qx = inst.q @ x
    lam = float(x @ qx)
    s = qx - lam
    dual_violation = float(max(0.0, -np.min(s))) if inst.n else 0.0
    comp_violation = float(np.max(np.abs(x * s)))
    return KktCertificate(lam, s, dual_violation, comp_violation, tol)


def homogenize(q, c) -> np.ndarray:
    """Fold the linear term of min x'Qx + 2c'x over the simplex into the matrix.

    Returns Q + e c' + c e', which has the same objective on the simplex
    because (sum x)^2 = 1 there.
    """
    q = symmetrize(q)
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or c.shape[0] != q.shape[0]:
        raise DimensionError(f"linear term shape {c.shape} does not match {q.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("linear term entries must be finite")
    # c[:, None] + c[None, :] is exactly symmetric (IEEE addition commutes),
    # so the sum with q stays exactly symmetric.
    return q + (c[:, None] + c[None, :])


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    TIME_LIMIT = "time_limit"
    INFEASIBLE_MODEL = "infeasible-model"
    ERROR = "error"


@dataclass
class SolveStats:
    nodes: int = 0
    lp_count: int = 0
    wall_s: float = 0.0


@dataclass
class StqpSolution:
    """Result of a solve: feasible point, value, bound and certificate."""

    x: np.ndarray | None
    value: float
    support: tuple[int, ...]
    certificate: KktCertificate | None
    status: SolveStatus
    best_bound: float
    gap: float
    stats: SolveStats = field(default_factory=SolveStats)


def gap_value(best_solution: float, best_bound: float) -> float:
    """Relative optimality gap |bound - solution| / (1e-10 + |solution|)."""
    if not math.isfinite(best_solution):
        return math.inf
    return abs(best_bound - best_solution) / (1e-10 + abs(best_solution))


def support_set(x, tol: float = SUPPORT_TOL) -> tuple[int, ...]:
    """Indices with x_j > tol, sorted."""
    x = np.asarray(x, dtype=float)
    return tuple(int(j) for j in np.flatnonzero(x > tol))


def make_solution(
    inst: StqpInstance,
    x,
    status: SolveStatus,
    best_bound: float,
    stats: SolveStats | None = None,
    support_tol: float = SUPPORT_TOL,
) -> StqpSolution:
    """Assemble a solution record, recomputing value, support and certificate."""
    stats = stats or SolveStats()
    if x is None:
        return StqpSolution(None, math.inf, (), None, status, best_bound, math.inf, stats)
    x = check_simplex(x, inst.n)
    value = evaluate(inst, x)
    cert = kkt_check(inst, x)
    return StqpSolution(
        x=x,
        value=value,
        support=support_set(x, support_tol),
        certificate=cert,
        status=status,
        best_bound=best_bound,
        gap=gap_value(value, best_bound),
        stats=stats,
    )


def support_kkt(q: np.ndarray, support) -> tuple[np.ndarray, float] | None:
    """Solve the stationarity system restricted to ``support``.

    Solves Q[P,P] u = lambda * e, sum(u) = 1 for (u, lambda).  Returns None if
    the bordered system is singular or badly conditioned (the solution fails a
    residual check) or not finite.  The sign of u is not checked here.
    """
    p = np.asarray(sorted(support), dtype=int)
    k = p.shape[0]
    if k == 0:
        return None
    if k == 1:
        u = np.array([1.0])
        return u, float(q[p[0], p[0]])
    qpp = q[np.ix_(p, p)]
    kmat = np.zeros((k + 1, k + 1))
    kmat[:k, :k] = qpp
    kmat[:k, k] = -1.0
    kmat[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(kmat, rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)):
        return None
    u, lam = sol[:k], float(sol[k])
    scale = 1.0 + float(np.max(np.abs(qpp))) + abs(lam)
    if np.max(np.abs(qpp @ u - lam)) > 1e-7 * scale:
        return None
    if abs(float(np.sum(u)) - 1.0) > 1e-9:
        return None
    return u, lam


def lift_support_point(n: int, support, u: np.ndarray) -> np.ndarray:
    """Embed a support-restricted point into R^n, clipping tiny negatives."""
    p = np.asarray(sorted(support), dtype=int)
    x = np.zeros(n)
    x[p] = np.maximum(u, 0.0)
    total = float(np.sum(x))
    if total <= 0.0:
        raise ValueError("support point has nonpositive mass")
    return x / total


def preprocess_trivial(inst: StqpInstance) -> StqpSolution | None:
    """Solve instances whose minimum entry sits on the diagonal.

    If min_k Q_kk equals the global minimum entry of Q, the vertex e_k is
    optimal with value Q_kk (smallest such k on ties).  Returns the exact
    vertex solution in that case, else None.
    """
    q = inst.q
    gamma0 = float(np.min(q))
    diag = np.diag(q)
    k = int(np.argmin(diag))
    if float(diag[k]) > gamma0:
        return None
    x = np.zeros(inst.n)
    x[k] = 1.0
    sol = make_solution(inst, x, SolveStatus.OPTIMAL, best_bound=float(diag[k]))
    sol.gap = 0.0
    return sol

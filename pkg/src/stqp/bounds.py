"""Lower bounds on the simplex-QP optimum and big-M data derived from them.

Two bounds are provided.  ``lb1`` is a closed form obtained by splitting Q
into a constant shift plus a nonnegative diagonal part.  ``lb2`` solves the
doubly nonnegative relaxation

    min { <Q, X> : <E, X> = 1, X psd, X >= 0 entrywise }

by operator splitting, then post-processes the approximate dual multiplier
into an always-valid certified bound: whenever Q - t*E = S + N with S psd and
N >= 0 entrywise, every simplex point satisfies x'Qx >= t.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import StqpInstance


class SizeLimitExceeded(RuntimeError):
    """Instance too large for the semidefinite bound without an explicit override."""


class BoundKind(str, Enum):
    L1 = "l1"
    L2_CERTIFIED = "l2-certified"
    USER_SUPPLIED = "user-supplied"


@dataclass(frozen=True)
class BoundCertificate:
    """A certified lower bound on the instance optimum.

    For kind L2_CERTIFIED the fields lambda_hat, s_matrix, n_matrix carry the
    dual splitting Q - value*E = s_matrix + n_matrix (s_matrix psd, n_matrix
    entrywise nonnegative) and residuals = (primal, dual, certification shift)
    from the splitting method.  ``converged`` is False when the splitting hit
    its iteration cap; the certified value remains valid regardless.
    """

    value: float
    kind: BoundKind
    lambda_hat: float | None = None
    s_matrix: np.ndarray | None = None
    n_matrix: np.ndarray | None = None
    residuals: tuple[float, float, float] | None = None
    converged: bool = True
    seconds: float = 0.0


@dataclass(frozen=True)
class BigMVector:
    """Per-row big-M coefficients M_j = max_i Q_ij - ell for a bound ell."""

    m: np.ndarray
    lower_bound: float


@dataclass
class SplittingConfig:
    """Knobs for the doubly-nonnegative splitting solver."""

    tol: float = 1e-7  # relative primal/dual residual target
    max_iter: int = 20000
    rho: float = 1.0  # initial penalty; adapted by residual balancing
    balance_ratio: float = 10.0  # rescale rho when residuals differ by this factor
    size_limit: int = 300
    allow_large: bool = False  # override the size limit explicitly
    refine_iters: int = 150  # alternating-projection polish per certification
    search_iters: int = 50  # bisection steps for the certified dual value


def user_bound(value: float) -> BoundCertificate:
    """Wrap an externally supplied lower bound."""
    return BoundCertificate(float(value), BoundKind.USER_SUPPLIED)


def lb1(inst: StqpInstance) -> BoundCertificate:
    """Closed-form bound gamma0 + 1 / sum_k 1/(Q_kk - gamma0).

    gamma0 is the minimum entry of Q.  When some diagonal entry attains
    gamma0 the harmonic term vanishes and the bound is gamma0 itself (the
    limit convention 1/0 = inf, 1/inf = 0).
    """
    q = inst.q
    gamma0 = float(np.min(q))
    diag = np.diag(q)
    gamma1 = float(np.min(diag))
    if gamma1 <= gamma0:
        value = gamma0
    else:
        value = gamma0 + 1.0 / float(np.sum(1.0 / (diag - gamma0)))
    return BoundCertificate(value, BoundKind.L1)


def _proj_psd(m: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) positive semidefinite matrix to a symmetric m."""
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    w = np.maximum(w, 0.0)
    out = (v * w) @ v.T
    return 0.5 * (out + out.T)


def _proj_unit_sum_nonneg(m: np.ndarray) -> np.ndarray:
    """Project onto {Z >= 0, sum of entries = 1} in Frobenius norm."""
    v = m.reshape(-1)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    idx = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[idx] / (idx + 1.0)
    return np.maximum(m - theta, 0.0)


def _certify(q: np.ndarray, lam: float, n0: np.ndarray, refine_iters: int):
    """Certified bound from a dual guess lam and nonnegative part n0.

    Polishes the split by alternating projections, then sets
    S = psd-projection of (Q - lam*E - N), delta = min(0, min entry of
    Q - lam*E - S) and N = (Q - lam*E - S) - delta, so that
    Q - (lam + delta)*E = S + N exactly with S psd and N >= 0.
    """
    m = q - lam
    n = np.maximum(n0, 0.0)
    prev = math.inf
    for _ in range(refine_iters):
        s = _proj_psd(m - n)
        n = np.maximum(m - s, 0.0)
        worst = float(np.min(m - s))
        if worst >= 0.0 or abs(prev - worst) < 1e-14:
            break
        prev = worst
    s = _proj_psd(m - n)
    r = m - s
    delta = min(0.0, float(np.min(r)))
    n = r - delta
    return lam + delta, s, n, delta


def lb2(inst: StqpInstance, cfg: SplittingConfig | None = None) -> BoundCertificate:
    """Certified doubly-nonnegative relaxation bound.

    Runs scaled ADMM on the relaxation, alternating a psd projection (via
    eigendecomposition) with a projection onto the nonnegative unit-sum
    matrices, with dual updates and residual-balanced penalty.  The
    approximate dual multiplier seeds a bisection over the certified dual
    value; the returned certificate is valid independently of how far the
    splitting converged.
    """
    cfg = cfg or SplittingConfig()
    n = inst.n
    if n > cfg.size_limit and not cfg.allow_large:
        raise SizeLimitExceeded(
            f"n={n} exceeds the semidefinite bound size limit {cfg.size_limit}"
        )
    t0 = time.perf_counter()
    q = inst.q
    gamma0 = float(np.min(q))
    gamma1 = float(np.min(np.diag(q)))
    scale = 1.0 + float(np.max(np.abs(q)))

    rho = cfg.rho
    z = np.full((n, n), 1.0 / (n * n))
    u = np.zeros((n, n))
    r_primal = r_dual = math.inf
    converged = False
    for it in range(cfg.max_iter):
        x = _proj_psd(z - u - q / rho)
        z_new = _proj_unit_sum_nonneg(x + u)
        u += x - z_new
        if it % 10 == 0 or it == cfg.max_iter - 1:
            r_primal = float(np.linalg.norm(x - z_new))
            r_dual = rho * float(np.linalg.norm(z_new - z))
            z = z_new
            norm_ref = max(float(np.linalg.norm(x)), float(np.linalg.norm(z)), 1.0)
            if r_primal <= cfg.tol * norm_ref and r_dual <= cfg.tol * max(
                rho * float(np.linalg.norm(u)), 1.0
            ):
                converged = True
                break
            if r_primal > cfg.balance_ratio * r_dual:
                rho *= 2.0
                u /= 2.0
            elif r_dual > cfg.balance_ratio * r_primal:
                rho /= 2.0
                u *= 2.0
        else:
            z = z_new

    # Dual extraction: at a fixed point rho*U = a*E - B with B >= 0 supported
    # off the support of Z, and Q - (-a)*E - B psd; so lambda_hat = -a.
    y = rho * u
    mask = z > 1e-12
    a = float(np.mean(y[mask])) if np.any(mask) else float(np.mean(y))
    lam_hat = -a
    n_hat = np.maximum(-(lam_hat + y), 0.0)

    best = None
    n_warm = n_hat
    slack = 1e-9 * scale

    def consider(lam, n0):
        nonlocal best, n_warm
        value, s, nn, delta = _certify(q, lam, n0, cfg.refine_iters)
        if best is None or value > best[0]:
            best = (value, s, nn, delta, lam)
        if delta >= -slack:
            n_warm = nn
        return delta

    # gamma0 is always certifiable (S = 0, N = Q - gamma0*E >= 0).
    consider(gamma0, q - gamma0)
    lo = gamma0
    if consider(lam_hat, n_hat) >= -slack:
        lo = max(lo, lam_hat)
    hi = gamma1
    for _ in range(cfg.search_iters):
        if hi - lo <= max(1e-12, 1e-10 * scale):
            break
        mid = 0.5 * (lo + hi)
        if consider(mid, n_warm) >= -slack:
            lo = mid
        else:
            hi = mid
    if hi <= lo:
        consider(hi, n_warm)

    value, s, nn, delta, lam_final = best
    return BoundCertificate(
        value=value,
        kind=BoundKind.L2_CERTIFIED,
        lambda_hat=lam_final,
        s_matrix=s,
        n_matrix=nn,
        residuals=(r_primal, r_dual, abs(delta)),
        converged=converged,
        seconds=time.perf_counter() - t0,
    )


def big_m(inst: StqpInstance, lb: BoundCertificate) -> BigMVector:
    """M_j = max_i Q_ij - ell: a valid cap on the dual slack s_j when x_j = 0."""
    m = inst.q.max(axis=0) - lb.value
    return BigMVector(m=m, lower_bound=lb.value)


def lambda_bounds(inst: StqpInstance, lb: BoundCertificate) -> tuple[float, float]:
    """Bounds [ell, min_k Q_kk] for the scalar objective variable."""
    return lb.value, float(np.min(np.diag(inst.q)))

import itertools

import numpy as np
import pytest

from stqp import SimpleGraph, StqpInstance


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def random_symmetric(n: int, seed: int, low: float = -1.0, high: float = 1.0) -> np.ndarray:
    rng = make_rng(seed)
    a = rng.uniform(low, high, (n, n))
    return (a + a.T) / 2.0


def random_instance(n: int, seed: int, **kw) -> StqpInstance:
    return StqpInstance(random_symmetric(n, seed, **kw), name=f"rand_n{n}_s{seed}")


def random_simplex_point(n: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.exponential(1.0, n)
    return x / x.sum()


def cycle_graph(n: int) -> SimpleGraph:
    return SimpleGraph(n, frozenset((i, (i + 1) % n) for i in range(n)))


def complete_graph(n: int) -> SimpleGraph:
    return SimpleGraph(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))


def petersen_graph() -> SimpleGraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    edges = frozenset(tuple(sorted(e)) for e in outer + spokes + inner)
    return SimpleGraph(10, edges)


def random_graph(n: int, seed: int, p: float = 0.5) -> SimpleGraph:
    rng = make_rng(seed)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return SimpleGraph(n, frozenset(edges))


def brute_force_stqp(q: np.ndarray, tol: float = 1e-12):
    """Exhaustive reference optimum over every index subset.

    Independently solves the bordered stationarity system on all 2^n - 1
    supports and keeps the best nonnegative solution; vertices are always
    included, so a minimizer is never missed.  Only usable for small n.
    """
    n = q.shape[0]
    best_val = np.inf
    best_x = None
    for r in range(1, n + 1):
        for support in itertools.combinations(range(n), r):
            idx = list(support)
            if r == 1:
                val = float(q[idx[0], idx[0]])
                if val < best_val:
                    best_val = val
                    best_x = np.zeros(n)
                    best_x[idx[0]] = 1.0
                continue
            block = np.zeros((r + 1, r + 1))
            block[:r, :r] = q[np.ix_(idx, idx)]
            block[:r, r] = -1.0
            block[r, :r] = 1.0
            rhs = np.zeros(r + 1)
            rhs[r] = 1.0
            try:
                sol = np.linalg.solve(block, rhs)
            except np.linalg.LinAlgError:
                continue
            if not np.all(np.isfinite(sol)):
                continue
            if np.max(np.abs(block @ sol - rhs)) > 1e-8:
                continue
            u = sol[:r]
            if float(np.min(u)) < -tol:
                continue
            x = np.zeros(n)
            x[idx] = np.maximum(u, 0.0)
            x /= x.sum()
            val = float(x @ q @ x)
            if val < best_val:
                best_val = val
                best_x = x
    return best_val, best_x


@pytest.fixture
def rng():
    return make_rng(20260815)

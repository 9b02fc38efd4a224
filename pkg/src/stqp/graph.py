"""Convexity graph, clique-support enumeration oracle, and stable-set reduction.

The convexity graph of Q has an edge (i, j) exactly when the restriction of
x'Qx to the segment between vertices e_i and e_j is strictly convex, i.e.
Q_ii + Q_jj - 2 Q_ij > 0.  Some global minimizer always has a support that is
a clique of this graph, which makes enumeration of cliques an exact (if
exponential) solver for small instances.

The stable-set connection: for a graph G with adjacency matrix A,
min { x'(I + A)x : x on the simplex } = 1 / alpha(G), and the convexity graph
of I + A is the complement of G.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import (
    Origin,
    SolveStats,
    SolveStatus,
    StqpInstance,
    StqpSolution,
    lift_support_point,
    make_solution,
    support_kkt,
)


class EnumerationBudgetExceeded(RuntimeError):
    """Raised when clique enumeration would exceed its configured budget."""


def _normalize_edges(n: int, edges) -> frozenset[tuple[int, int]]:
    out = set()
    for i, j in edges:
        i, j = int(i), int(j)
        if i == j:
            raise ValueError(f"self-loop at vertex {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
        out.add((min(i, j), max(i, j)))
    return frozenset(out)


@dataclass(frozen=True)
class SimpleGraph:
    """Undirected graph on vertices 0..n-1 with edges stored as sorted pairs."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        object.__setattr__(self, "edges", _normalize_edges(self.n, self.edges))

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1.0
        return a

    def neighbor_sets(self) -> list[set[int]]:
        nbr: list[set[int]] = [set() for _ in range(self.n)]
        for i, j in self.edges:
            nbr[i].add(j)
            nbr[j].add(i)
        return nbr

    def complement(self) -> "SimpleGraph":
        full = {(i, j) for i in range(self.n) for j in range(i + 1, self.n)}
        return SimpleGraph(self.n, frozenset(full - set(self.edges)))

    # structural equality: a convexity graph and a plain graph with the same
    # vertices and edges are the same graph
    def __eq__(self, other):
        if not isinstance(other, SimpleGraph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))


@dataclass(frozen=True)
class ConvexityGraph(SimpleGraph):
    """Convexity graph of an instance, with its edge density."""

    @property
    def density(self) -> float:
        npairs = self.n * (self.n - 1) // 2
        if npairs == 0:
            return 1.0
        return len(self.edges) / npairs


def build_convexity_graph(inst: StqpInstance) -> ConvexityGraph:
    """Edges (i, j) with Q_ii + Q_jj - 2 Q_ij > 0; zero discriminant is no edge."""
    q = inst.q
    d = np.diag(q)
    disc = d[:, None] + d[None, :] - 2.0 * q
    ii, jj = np.triu_indices(inst.n, k=1)
    mask = disc[ii, jj] > 0.0
    edges = frozenset((int(i), int(j)) for i, j in zip(ii[mask], jj[mask]))
    return ConvexityGraph(inst.n, edges)


def valid_inequality_pairs(graph: SimpleGraph) -> list[tuple[int, int]]:
    """Non-edges of the convexity graph: pairs that cannot share a support."""
    present = set(graph.edges)
    return [
        (i, j)
        for i in range(graph.n)
        for j in range(i + 1, graph.n)
        if (i, j) not in present
    ]


def enumerate_cliques(graph: SimpleGraph, max_size: int | None = None, cap: int = 1_000_000):
    """Yield every clique (as a sorted tuple), singletons included, each once.

    Depth-first extension in increasing vertex order; raises
    EnumerationBudgetExceeded after ``cap`` cliques.
    """
    n = graph.n
    if max_size is None:
        max_size = n
    nbr = graph.neighbor_sets()
    count = 0

    def extend(clique: list[int], candidates: list[int]):
        nonlocal count
        for idx, v in enumerate(candidates):
            clique.append(v)
            count += 1
            if count > cap:
                raise EnumerationBudgetExceeded(f"more than {cap} cliques")
            yield tuple(clique)
            if len(clique) < max_size:
                narrowed = [u for u in candidates[idx + 1 :] if u in nbr[v]]
                yield from extend(clique, narrowed)
            clique.pop()

    yield from extend([], list(range(n)))


def oracle_solve(
    inst: StqpInstance,
    max_support: int | None = None,
    clique_cap: int = 1_000_000,
    sign_tol: float = 1e-10,
) -> StqpSolution:
    """Exact global minimum by enumerating clique supports of the convexity graph.

    For each clique P (singletons included) the stationarity system
    Q[P,P] u = lambda e, sum(u) = 1 is solved; candidates with u >= -sign_tol
    are kept, singular systems are skipped (a minimizer on such a face is
    matched by another support).  Exponential in general: intended for small
    n, with enumeration bounded by ``clique_cap``.

    With ``max_support`` below the largest clique size the result is exact
    only if some optimal support is that small.
    """
    t0 = time.perf_counter()
    graph = build_convexity_graph(inst)
    q = inst.q
    best_value = np.inf
    best_x = None
    for clique in enumerate_cliques(graph, max_size=max_support, cap=clique_cap):
        res = support_kkt(q, clique)
        if res is None:
            continue
        u, _lam = res
        if np.min(u) < -sign_tol:
            continue
        x = lift_support_point(inst.n, clique, u)
        value = float(x @ q @ x)
        if value < best_value:
            best_value = value
            best_x = x
    if best_x is None:
        # Singletons always produce candidates, so this cannot trigger.
        raise RuntimeError("no candidate support found")
    stats = SolveStats(nodes=0, lp_count=0, wall_s=time.perf_counter() - t0)
    sol = make_solution(inst, best_x, SolveStatus.OPTIMAL, best_bound=best_value, stats=stats)
    sol.gap = 0.0
    return sol


def motzkin_straus(graph: SimpleGraph, name: str | None = None) -> StqpInstance:
    """Instance Q = I + A whose optimal value is 1/alpha(graph)."""
    q = np.eye(graph.n) + graph.adjacency()
    return StqpInstance(q, name=name or f"ms_n{graph.n}_m{len(graph.edges)}", origin=Origin.REDUCED)


def alpha_bruteforce(graph: SimpleGraph, max_n: int = 25) -> int:
    """Exact stable-set number by branch-and-bound max-clique on the complement.

    Pivoting Bron-Kerbosch over maximal cliques with a size-based prune.
    """
    if graph.n > max_n:
        raise EnumerationBudgetExceeded(f"n={graph.n} exceeds brute-force budget {max_n}")
    comp = graph.complement()
    nbr = comp.neighbor_sets()
    best = 1  # single vertex is always stable

    def bk(size: int, p: set[int], x: set[int]):
        nonlocal best
        if not p and not x:
            best = max(best, size)
            return
        if size + len(p) <= best:
            return
        pivot = min(p | x, key=lambda u: (-len(p & nbr[u]), u))
        for v in sorted(p - nbr[pivot]):
            bk(size + 1, p & nbr[v], x & nbr[v])
            p.remove(v)
            x.add(v)

    bk(0, set(range(comp.n)), set())
    return best

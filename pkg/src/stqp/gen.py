"""Instance generators and file formats.

Two random families:

* ``gen_blst``: every entry Q_ij (i <= j) i.i.d. triangular on (a, c, b) via
  inverse-CDF sampling.  The default shape (0, 0.5, 1) is this package's
  choice, not taken from elsewhere.
* ``gen_st_density``: draws an Erdos-Renyi graph G(n, density) and fills Q so
  that its convexity graph is exactly the sampled graph, with a 0.1 margin on
  either side of the edge threshold (Q_ii + Q_jj)/2.  Instances whose global
  minimum sits on the diagonal are rejected and resampled, except when the
  sampled graph has no edges (then every instance is vertex-optimal by
  construction and the instance is returned as is).

Randomness comes from numpy's Philox counter-based 64-bit generator, keyed by
the seed, so corpora are reproducible across platforms.

File formats:

* instance text: ``stqp <n>`` header line, then n whitespace-separated rows
  of the lower triangle; ``#`` starts a comment.
* instance JSON: ``{"name": ..., "n": ..., "lower_triangle": [[...], ...]}``.
* DIMACS graphs: ``c`` comments, one ``p edge <n> <m>`` line, ``e <i> <j>``
  edges with 1-based vertices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Origin, StqpInstance
from .graph import SimpleGraph


class ParseError(ValueError):
    """Malformed input file; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class GenerationError(RuntimeError):
    """Rejection sampling failed to produce an acceptable instance."""


@dataclass(frozen=True)
class TriangularSpec:
    """Entrywise triangular distribution: support [a, b], mode c."""

    a: float = 0.0
    c: float = 0.5
    b: float = 1.0

    def __post_init__(self):
        if not (self.a <= self.c <= self.b) or self.a >= self.b:
            raise ValueError(f"need a <= c <= b with a < b, got {self}")

    @property
    def mean(self) -> float:
        return (self.a + self.b + self.c) / 3.0

    @property
    def variance(self) -> float:
        a, b, c = self.a, self.b, self.c
        return (a * a + b * b + c * c - a * b - a * c - b * c) / 18.0


@dataclass(frozen=True)
class DensitySpec:
    """Target convexity-graph density and diagonal/edge fill ranges."""

    density: float
    margin: float = 0.1
    diag_low: float = 1.0
    diag_high: float = 2.0
    max_attempts: int = 200

    def __post_init__(self):
        if not 0.0 <= self.density <= 1.0:
            raise ValueError(f"density must be in [0, 1], got {self.density}")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed)))


def triangular_icdf(u, a: float, c: float, b: float) -> np.ndarray:
    """Inverse CDF of the triangular distribution, vectorized."""
    u = np.asarray(u, dtype=float)
    split = (c - a) / (b - a)
    left = a + np.sqrt(u * (b - a) * (c - a))
    right = b - np.sqrt((1.0 - u) * (b - a) * (b - c))
    return np.where(u < split, left, right)


def gen_blst(n: int, seed: int, spec: TriangularSpec | None = None) -> StqpInstance:
    """Instance with i.i.d. triangular entries on the upper triangle (mirrored)."""
    if n < 1:
        raise ValueError("n must be positive")
    spec = spec or TriangularSpec()
    rng = _rng(seed)
    k = n * (n + 1) // 2
    draws = triangular_icdf(rng.random(k), spec.a, spec.c, spec.b)
    q = np.zeros((n, n))
    pos = 0
    for i in range(n):
        for j in range(i, n):
            q[i, j] = q[j, i] = draws[pos]
            pos += 1
    return StqpInstance(q, name=f"blst_n{n}_s{seed}", origin=Origin.GENERATED)


def _sample_st(rng: np.random.Generator, n: int, spec: DensitySpec):
    edges = set()
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < spec.density:
                edges.add((i, j))
    diag = spec.diag_low + (spec.diag_high - spec.diag_low) * rng.random(n)
    q = np.diag(diag)
    for i in range(n):
        for j in range(i + 1, n):
            mid = 0.5 * (diag[i] + diag[j])
            u = rng.random()
            if (i, j) in edges:
                val = u * (mid - spec.margin)  # uniform on [0, mid - margin]
            else:
                val = mid + spec.margin + u  # uniform on [mid + margin, mid + margin + 1]
            q[i, j] = q[j, i] = val
    return q, edges


def gen_st_density(
    n: int, seed: int, spec: DensitySpec, return_graph: bool = False
):
    """Instance whose convexity graph is exactly a sampled G(n, density) graph.

    Resamples until no diagonal entry is the global minimum (so the instance
    survives vertex preprocessing), unless the sampled graph is edgeless, in
    which case that is impossible and the trivial instance is returned.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = _rng(seed)
    for _ in range(spec.max_attempts):
        q, edges = _sample_st(rng, n, spec)
        inst = StqpInstance(q, name=f"st_n{n}_d{spec.density}_s{seed}", origin=Origin.GENERATED)
        offdiag_ok = not edges or float(np.min(q)) < float(np.min(np.diag(q)))
        if offdiag_ok:
            if return_graph:
                return inst, SimpleGraph(n, frozenset(edges))
            return inst
    raise GenerationError(f"no acceptable instance in {spec.max_attempts} attempts")


# ---------------------------------------------------------------------------
# instance files


def _triangle_rows(q: np.ndarray) -> list[list[float]]:
    return [[float(q[i, j]) for j in range(i + 1)] for i in range(q.shape[0])]


def save_instance(path, inst: StqpInstance, fmt: str | None = None) -> None:
    """Write text (default) or JSON depending on ``fmt`` or the file suffix."""
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "text")
    if fmt == "json":
        payload = {"name": inst.name, "n": inst.n, "lower_triangle": _triangle_rows(inst.q)}
        path.write_text(json.dumps(payload, indent=1) + "\n")
    elif fmt == "text":
        lines = [f"# {inst.name}", f"stqp {inst.n}"]
        for row in _triangle_rows(inst.q):
            lines.append(" ".join(repr(v) for v in row))
        path.write_text("\n".join(lines) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def _from_triangle(rows: list[list[float]], n: int) -> np.ndarray:
    q = np.zeros((n, n))
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            q[i, j] = q[j, i] = float(v)
    return q


def load_instance(path) -> StqpInstance:
    """Read an instance from text or JSON format (sniffed by suffix)."""
    path = Path(path)
    if path.suffix == ".json":
        try:
            payload = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}") from exc
        try:
            n = int(payload["n"])
            rows = payload["lower_triangle"]
            name = str(payload.get("name", path.stem))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad instance JSON: {exc}") from exc
        if len(rows) != n or any(len(row) != i + 1 for i, row in enumerate(rows)):
            raise ParseError("lower_triangle must have rows of lengths 1..n")
        return StqpInstance(_from_triangle(rows, n), name=name, origin=Origin.FILE)

    n = None
    rows: list[list[float]] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if n is None:
                parts = line.split()
                if len(parts) != 2 or parts[0] != "stqp":
                    raise ParseError("expected header 'stqp <n>'", lineno)
                try:
                    n = int(parts[1])
                except ValueError:
                    raise ParseError(f"bad dimension {parts[1]!r}", lineno) from None
                if n < 1:
                    raise ParseError(f"dimension must be positive, got {n}", lineno)
                continue
            try:
                row = [float(tok) for tok in line.split()]
            except ValueError:
                raise ParseError(f"bad number in row: {line!r}", lineno) from None
            if len(row) != len(rows) + 1:
                raise ParseError(
                    f"row {len(rows) + 1} must have {len(rows) + 1} entries, got {len(row)}",
                    lineno,
                )
            rows.append(row)
    if n is None:
        raise ParseError("missing 'stqp <n>' header")
    if len(rows) != n:
        raise ParseError(f"expected {n} rows, got {len(rows)}")
    return StqpInstance(_from_triangle(rows, n), name=path.stem, origin=Origin.FILE)


# ---------------------------------------------------------------------------
# DIMACS graphs


def load_dimacs(path, complement: bool = False) -> SimpleGraph:
    """Parse a DIMACS edge-format graph; set ``complement`` to flip edges.

    The complement decision is the caller's: stable-set work on G runs the
    clique machinery on the complement of G, and this flag is the explicit
    switch for that.
    """
    path = Path(path)
    n = None
    edges: set[tuple[int, int]] = set()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("c"):
                continue
            parts = line.split()
            if parts[0] == "p":
                if n is not None:
                    raise ParseError("duplicate problem line", lineno)
                if len(parts) != 4 or parts[1] != "edge":
                    raise ParseError(f"expected 'p edge <n> <m>', got {line!r}", lineno)
                try:
                    n = int(parts[2])
                    int(parts[3])
                except ValueError:
                    raise ParseError(f"bad problem line numbers: {line!r}", lineno) from None
                if n < 1:
                    raise ParseError(f"vertex count must be positive, got {n}", lineno)
            elif parts[0] == "e":
                if n is None:
                    raise ParseError("edge before problem line", lineno)
                if len(parts) != 3:
                    raise ParseError(f"expected 'e <i> <j>', got {line!r}", lineno)
                try:
                    i, j = int(parts[1]), int(parts[2])
                except ValueError:
                    raise ParseError(f"bad edge endpoints: {line!r}", lineno) from None
                if not (1 <= i <= n and 1 <= j <= n):
                    raise ParseError(f"edge ({i}, {j}) outside 1..{n}", lineno)
                if i == j:
                    raise ParseError(f"self-loop at {i}", lineno)
                edges.add((min(i, j) - 1, max(i, j) - 1))
            else:
                raise ParseError(f"unknown line type {parts[0]!r}", lineno)
    if n is None:
        raise ParseError("missing problem line")
    graph = SimpleGraph(n, frozenset(edges))
    return graph.complement() if complement else graph


def save_dimacs(path, graph: SimpleGraph, comment: str | None = None) -> None:
    lines = []
    if comment:
        lines.append(f"c {comment}")
    lines.append(f"p edge {graph.n} {len(graph.edges)}")
    for i, j in sorted(graph.edges):
        lines.append(f"e {i + 1} {j + 1}")
    Path(path).write_text("\n".join(lines) + "\n")

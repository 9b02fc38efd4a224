"""Mixed-integer linear models for the simplex QP, plus LP-format text I/O.

Two exact reformulations are built from an instance, a lower bound ell and
big-M data M_j = max_i Q_ij - ell:

* kkt form (scalar variable lam):
    min lam  s.t.  Qx - lam*e - s = 0, sum(x) = 1,
                   x_j <= y_j, s_j <= M_j (1 - y_j), x, s >= 0, y binary

* overestimator form (scalar variable alpha):
    min alpha  s.t.  (Qx)_j <= alpha + z_j, sum(x) = 1,
                     x_j <= y_j, z_j <= M_j (1 - y_j), x, z >= 0, y binary

Both attain the exact optimum nu(Q); the second is a relaxation of the first
under z := s, alpha := lam.  Pairs (i, j) that cannot both carry mass at an
optimum (non-edges of the convexity graph) yield valid cuts y_i + y_j <= 1.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .bounds import BigMVector, BoundCertificate
from .core import StqpInstance
from .graph import SimpleGraph

CONTINUOUS = "continuous"
BINARY = "binary"

LE = "<="
EQ = "="
GE = ">="


class InvalidBound(ValueError):
    """Lower bound above min_k Q_kk: cannot be a valid bound on the optimum."""


class UnknownVariable(KeyError):
    """A referenced variable role or name is absent from the model."""


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str = CONTINUOUS
    lower: float = 0.0
    upper: float = math.inf


@dataclass(frozen=True)
class Constraint:
    """Linear row: sum of coeff * variable (by index) relation rhs."""

    name: str
    coeffs: tuple[tuple[int, float], ...]
    relation: str
    rhs: float


@dataclass(frozen=True)
class MilpModel:
    """Immutable minimization model with role annotations.

    ``roles`` maps a role name ("x", "s", "z", "y") to the tuple of variable
    indices playing that role, and scalar roles ("lam", "alpha") to a
    one-element tuple.
    """

    variables: tuple[Variable, ...]
    objective: tuple[tuple[int, float], ...]
    constraints: tuple[Constraint, ...]
    roles: dict = field(default_factory=dict)
    name: str = "model"

    def variable_index(self, name: str) -> int:
        for i, v in enumerate(self.variables):
            if v.name == name:
                return i
        raise UnknownVariable(name)

    def role(self, key: str) -> tuple[int, ...]:
        try:
            return tuple(self.roles[key])
        except KeyError:
            raise UnknownVariable(key) from None

    def binary_indices(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.variables) if v.kind == BINARY)


def _q_row_terms(q: np.ndarray, j: int, x0: int) -> list[tuple[int, float]]:
    """Terms of row j of Qx over the x block, zero coefficients dropped."""
    return [(x0 + i, float(q[j, i])) for i in range(q.shape[0]) if q[j, i] != 0.0]


def _check_bound(inst: StqpInstance, lb: BoundCertificate) -> float:
    gamma1 = float(np.min(np.diag(inst.q)))
    if lb.value > gamma1:
        raise InvalidBound(
            f"lower bound {lb.value} exceeds min diagonal entry {gamma1}"
        )
    return gamma1


def build_milp1(inst: StqpInstance, lb: BoundCertificate, bigm: BigMVector) -> MilpModel:
    """KKT-based model with variables x, s, y and scalar lam."""
    n = inst.n
    gamma1 = _check_bound(inst, lb)
    q = inst.q
    m = bigm.m
    variables = (
        [Variable(f"x{j + 1}", CONTINUOUS, 0.0, 1.0) for j in range(n)]
        + [Variable(f"s{j + 1}", CONTINUOUS, 0.0, math.inf) for j in range(n)]
        + [Variable(f"y{j + 1}", BINARY, 0.0, 1.0) for j in range(n)]
        + [Variable("lam", CONTINUOUS, lb.value, gamma1)]
    )
    x0, s0, y0, lam = 0, n, 2 * n, 3 * n
    rows = []
    for j in range(n):
        rows.append(
            Constraint(
                f"kkt{j + 1}",
                tuple(_q_row_terms(q, j, x0) + [(lam, -1.0), (s0 + j, -1.0)]),
                EQ,
                0.0,
            )
        )
    rows.append(Constraint("simplex", tuple((x0 + j, 1.0) for j in range(n)), EQ, 1.0))
    for j in range(n):
        rows.append(Constraint(f"link{j + 1}", ((x0 + j, 1.0), (y0 + j, -1.0)), LE, 0.0))
    for j in range(n):
        terms = [(s0 + j, 1.0)]
        if m[j] != 0.0:
            terms.append((y0 + j, float(m[j])))
        rows.append(Constraint(f"bigm{j + 1}", tuple(terms), LE, float(m[j])))
    roles = {
        "x": tuple(range(x0, x0 + n)),
        "s": tuple(range(s0, s0 + n)),
        "y": tuple(range(y0, y0 + n)),
        "lam": (lam,),
    }
    return MilpModel(
        variables=tuple(variables),
        objective=((lam, 1.0),),
        constraints=tuple(rows),
        roles=roles,
        name=f"kkt_{inst.name}",
    )


def build_milp2(inst: StqpInstance, lb: BoundCertificate, bigm: BigMVector) -> MilpModel:
    """Row-overestimator model with variables x, z, y and scalar alpha."""
    n = inst.n
    gamma1 = _check_bound(inst, lb)
    q = inst.q
    m = bigm.m
    variables = (
        [Variable(f"x{j + 1}", CONTINUOUS, 0.0, 1.0) for j in range(n)]
        + [Variable(f"z{j + 1}", CONTINUOUS, 0.0, math.inf) for j in range(n)]
        + [Variable(f"y{j + 1}", BINARY, 0.0, 1.0) for j in range(n)]
        + [Variable("alpha", CONTINUOUS, lb.value, gamma1)]
    )
    x0, z0, y0, alpha = 0, n, 2 * n, 3 * n
    rows = []
    for j in range(n):
        rows.append(
            Constraint(
                f"row{j + 1}",
                tuple(_q_row_terms(q, j, x0) + [(alpha, -1.0), (z0 + j, -1.0)]),
                LE,
                0.0,
            )
        )
    rows.append(Constraint("simplex", tuple((x0 + j, 1.0) for j in range(n)), EQ, 1.0))
    for j in range(n):
        rows.append(Constraint(f"link{j + 1}", ((x0 + j, 1.0), (y0 + j, -1.0)), LE, 0.0))
    for j in range(n):
        terms = [(z0 + j, 1.0)]
        if m[j] != 0.0:
            terms.append((y0 + j, float(m[j])))
        rows.append(Constraint(f"bigm{j + 1}", tuple(terms), LE, float(m[j])))
    roles = {
        "x": tuple(range(x0, x0 + n)),
        "z": tuple(range(z0, z0 + n)),
        "y": tuple(range(y0, y0 + n)),
        "alpha": (alpha,),
    }
    return MilpModel(
        variables=tuple(variables),
        objective=((alpha, 1.0),),
        constraints=tuple(rows),
        roles=roles,
        name=f"over_{inst.name}",
    )


def add_valid_inequalities(model: MilpModel, pairs) -> MilpModel:
    """Append cuts y_i + y_j <= 1 for each (i, j) pair of instance indices."""
    y = model.role("y")
    rows = list(model.constraints)
    for i, j in pairs:
        i, j = (i, j) if i < j else (j, i)
        rows.append(
            Constraint(f"vi_{i + 1}_{j + 1}", ((y[i], 1.0), (y[j], 1.0)), LE, 1.0)
        )
    return MilpModel(
        variables=model.variables,
        objective=model.objective,
        constraints=tuple(rows),
        roles=dict(model.roles),
        name=model.name,
    )


def build_stable_set_ilp(graph: SimpleGraph) -> MilpModel:
    """Max stable set as a minimization model: min -sum(y), y_i + y_j <= 1 per edge.

    The model optimum is -alpha(graph).
    """
    n = graph.n
    variables = tuple(Variable(f"y{j + 1}", BINARY, 0.0, 1.0) for j in range(n))
    rows = tuple(
        Constraint(f"edge_{i + 1}_{j + 1}", ((i, 1.0), (j, 1.0)), LE, 1.0)
        for i, j in sorted(graph.edges)
    )
    return MilpModel(
        variables=variables,
        objective=tuple((j, -1.0) for j in range(n)),
        constraints=rows,
        roles={"y": tuple(range(n))},
        name=f"stableset_n{n}",
    )


def check_feasible(model: MilpModel, values, tol: float = 1e-8) -> bool:
    """Whether a full assignment satisfies all bounds, rows and integrality."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] != len(model.variables):
        return False
    for i, v in enumerate(model.variables):
        if not (v.lower - tol <= values[i] <= v.upper + tol):
            return False
        if v.kind == BINARY and min(values[i], 1.0 - values[i]) > tol:
            return False
    for row in model.constraints:
        lhs = sum(c * values[i] for i, c in row.coeffs)
        if row.relation == LE and lhs > row.rhs + tol:
            return False
        if row.relation == GE and lhs < row.rhs - tol:
            return False
        if row.relation == EQ and abs(lhs - row.rhs) > tol:
            return False
    return True


def objective_value(model: MilpModel, values) -> float:
    values = np.asarray(values, dtype=float)
    return float(sum(c * values[i] for i, c in model.objective))


# ---------------------------------------------------------------------------
# LP-format text


def _fmt(x: float) -> str:
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return repr(float(x))


def _terms_text(coeffs, names) -> str:
    parts = []
    for idx, coef in coeffs:
        mag = _fmt(abs(coef))
        if not parts:
            sign = "-" if coef < 0 else ""
            parts.append(f"{sign}{mag} {names[idx]}")
        else:
            op = "-" if coef < 0 else "+"
            parts.append(f"{op} {mag} {names[idx]}")
    return " ".join(parts) if parts else "0.0 __zero"


def export_lp_text(model: MilpModel) -> str:
    """Deterministic LP-format text; ``parse_lp_text`` inverts it exactly."""
    names = [v.name for v in model.variables]
    lines = ["Minimize", f" obj: {_terms_text(model.objective, names)}", "Subject To"]
    for row in model.constraints:
        lines.append(f" {row.name}: {_terms_text(row.coeffs, names)} {row.relation} {_fmt(row.rhs)}")
    lines.append("Bounds")
    for v in model.variables:
        lo_fin, up_fin = math.isfinite(v.lower), math.isfinite(v.upper)
        if lo_fin and up_fin:
            lines.append(f" {_fmt(v.lower)} <= {v.name} <= {_fmt(v.upper)}")
        elif lo_fin:
            lines.append(f" {v.name} >= {_fmt(v.lower)}")
        elif up_fin:
            lines.append(f" {v.name} <= {_fmt(v.upper)}")
        else:
            lines.append(f" {v.name} free")
    binaries = [v.name for v in model.variables if v.kind == BINARY]
    if binaries:
        lines.append("Binaries")
        lines.append(" " + " ".join(binaries))
    lines.append("End")
    return "\n".join(lines) + "\n"


class LpTextError(ValueError):
    pass


_TERM_RE = re.compile(r"([+-]?)\s*([0-9.eE+-]*[0-9.])\s+([A-Za-z_][A-Za-z0-9_]*)")


def _parse_terms(text: str, index_of) -> tuple[tuple[int, float], ...]:
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m:
            raise LpTextError(f"cannot parse terms at: {text[pos:pos + 40]!r}")
        sign, mag, name = m.groups()
        coef = float(mag) * (-1.0 if sign == "-" else 1.0)
        if name != "__zero":
            out.append((index_of(name), coef))
        pos = m.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
    return tuple(out)


def infer_roles(names) -> dict:
    """Reconstruct role annotations from this package's naming convention."""
    roles: dict = {}
    for idx, name in enumerate(names):
        m = re.fullmatch(r"([xszy])(\d+)", name)
        if m:
            roles.setdefault(m.group(1), []).append(idx)
        elif name in ("lam", "alpha"):
            roles[name] = [idx]
    return {k: tuple(v) for k, v in roles.items()}


def parse_lp_text(text: str, name: str = "model") -> MilpModel:
    """Parse LP text produced by ``export_lp_text`` back into a model."""
    sections: dict[str, list[str]] = {}
    current = None
    for raw in text.splitlines():
        line = raw.rstrip()
        if not line.strip():
            continue
        head = line.strip()
        if head in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
            current = head
            sections.setdefault(current, [])
            continue
        if current is None:
            raise LpTextError(f"content before a section header: {line!r}")
        sections[current].append(line.strip())
    for required in ("Minimize", "Subject To", "Bounds", "End"):
        if required not in sections:
            raise LpTextError(f"missing section {required}")

    bound_lines = sections["Bounds"]
    names: list[str] = []
    lowers: list[float] = []
    uppers: list[float] = []
    for line in bound_lines:
        tokens = line.split()
        if len(tokens) == 5 and tokens[1] == "<=" and tokens[3] == "<=":
            names.append(tokens[2])
            lowers.append(float(tokens[0]))
            uppers.append(float(tokens[4]))
        elif len(tokens) == 3 and tokens[1] == ">=":
            names.append(tokens[0])
            lowers.append(float(tokens[2]))
            uppers.append(math.inf)
        elif len(tokens) == 3 and tokens[1] == "<=":
            names.append(tokens[0])
            lowers.append(-math.inf)
            uppers.append(float(tokens[2]))
        elif len(tokens) == 2 and tokens[1] == "free":
            names.append(tokens[0])
            lowers.append(-math.inf)
            uppers.append(math.inf)
        else:
            raise LpTextError(f"bad bounds line: {line!r}")
    index = {nm: i for i, nm in enumerate(names)}
    if len(index) != len(names):
        raise LpTextError("duplicate variable names in Bounds")

    binaries = set()
    for line in sections.get("Binaries", []):
        binaries.update(line.split())
    unknown = binaries - set(names)
    if unknown:
        raise LpTextError(f"binary names missing from Bounds: {sorted(unknown)}")

    def index_of(nm: str) -> int:
        try:
            return index[nm]
        except KeyError:
            raise LpTextError(f"undeclared variable {nm!r}") from None

    obj_lines = sections["Minimize"]
    if len(obj_lines) != 1 or not obj_lines[0].startswith("obj:"):
        raise LpTextError("objective must be a single 'obj:' line")
    objective = _parse_terms(obj_lines[0][len("obj:") :], index_of)

    constraints = []
    for line in sections["Subject To"]:
        if ":" not in line:
            raise LpTextError(f"constraint without name: {line!r}")
        cname, rest = line.split(":", 1)
        m = re.search(r"\s(<=|>=|=)\s", rest)
        if not m:
            raise LpTextError(f"constraint without relation: {line!r}")
        relation = m.group(1)
        lhs, rhs = rest[: m.start()], rest[m.end() :]
        constraints.append(
            Constraint(cname.strip(), _parse_terms(lhs, index_of), relation, float(rhs))
        )

    variables = tuple(
        Variable(nm, BINARY if nm in binaries else CONTINUOUS, lowers[i], uppers[i])
        for i, nm in enumerate(names)
    )
    return MilpModel(
        variables=variables,
        objective=objective,
        constraints=tuple(constraints),
        roles=infer_roles(names),
        name=name,
    )

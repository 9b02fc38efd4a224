"""Global solver for standard quadratic programs over the unit simplex.

Two mixed-integer linear reformulations of min x'Qx on the simplex, driven
by combinatorial and semidefinite lower bounds, with a built-in LP solver,
branch and bound, instance generators, and a benchmark harness.
"""

from .bench import (
    ALL_VARIANTS,
    BenchRecord,
    FormulationConfig,
    ProfilePoint,
    bench_run,
    performance_profile,
    plot_profile,
    profile_to_csv,
    records_from_csv,
    records_to_csv,
    records_to_json,
    render_summary,
    solve_variant,
    summarize,
)
from .bounds import (
    BigMVector,
    BoundCertificate,
    BoundKind,
    SizeLimitExceeded,
    SplittingConfig,
    big_m,
    lambda_bounds,
    lb1,
    lb2,
    user_bound,
)
from .core import (
    DimensionError,
    KktCertificate,
    Origin,
    SolveStats,
    SolveStatus,
    StqpInstance,
    StqpSolution,
    evaluate,
    gap_value,
    homogenize,
    kkt_check,
    make_solution,
    preprocess_trivial,
    support_kkt,
    support_set,
    symmetrize,
)
from .gen import (
    DensitySpec,
    GenerationError,
    ParseError,
    TriangularSpec,
    gen_blst,
    gen_st_density,
    load_dimacs,
    load_instance,
    save_dimacs,
    save_instance,
)
from .graph import (
    ConvexityGraph,
    EnumerationBudgetExceeded,
    SimpleGraph,
    alpha_bruteforce,
    build_convexity_graph,
    enumerate_cliques,
    motzkin_straus,
    oracle_solve,
    valid_inequality_pairs,
)
from .milp import (
    Constraint,
    InvalidBound,
    LpTextError,
    MilpModel,
    UnknownVariable,
    Variable,
    add_valid_inequalities,
    build_milp1,
    build_milp2,
    build_stable_set_ilp,
    check_feasible,
    export_lp_text,
    objective_value,
    parse_lp_text,
)
from .simplex import LpNumericalError, LpResult, LpStatus, StandardLp, solve_lp, solve_model_lp
from .solver import MilpResult, SolverConfig, incumbent_heuristic, minimize, solve_milp

__version__ = "0.1.0"

__all__ = [
    "ALL_VARIANTS",
    "BenchRecord",
    "BigMVector",
    "BoundCertificate",
    "BoundKind",
    "Constraint",
    "ConvexityGraph",
    "DensitySpec",
    "DimensionError",
    "EnumerationBudgetExceeded",
    "FormulationConfig",
    "GenerationError",
    "InvalidBound",
    "KktCertificate",
    "LpNumericalError",
    "LpResult",
    "LpStatus",
    "LpTextError",
    "MilpModel",
    "MilpResult",
    "Origin",
    "ParseError",
    "ProfilePoint",
    "SimpleGraph",
    "SizeLimitExceeded",
    "SolveStats",
    "SolveStatus",
    "SolverConfig",
    "SplittingConfig",
    "StandardLp",
    "StqpInstance",
    "StqpSolution",
    "TriangularSpec",
    "UnknownVariable",
    "Variable",
    "add_valid_inequalities",
    "alpha_bruteforce",
    "bench_run",
    "big_m",
    "build_convexity_graph",
    "build_milp1",
    "build_milp2",
    "build_stable_set_ilp",
    "check_feasible",
    "enumerate_cliques",
    "evaluate",
    "export_lp_text",
    "gap_value",
    "gen_blst",
    "gen_st_density",
    "homogenize",
    "incumbent_heuristic",
    "kkt_check",
    "lambda_bounds",
    "lb1",
    "lb2",
    "load_dimacs",
    "load_instance",
    "make_solution",
    "minimize",
    "motzkin_straus",
    "objective_value",
    "oracle_solve",
    "parse_lp_text",
    "performance_profile",
    "plot_profile",
    "preprocess_trivial",
    "profile_to_csv",
    "records_from_csv",
    "records_to_csv",
    "records_to_json",
    "render_summary",
    "save_dimacs",
    "save_instance",
    "solve_lp",
    "solve_milp",
    "solve_model_lp",
    "solve_variant",
    "summarize",
    "support_kkt",
    "support_set",
    "symmetrize",
    "user_bound",
    "valid_inequality_pairs",
]

"""saddlekit: nonconvex-strongly-concave minimax experiments.

Hard chain instances with known oracle-complexity floors, first-order and
component-oracle solvers, an inexact proximal-point acceleration wrapper,
and an instrumented oracle layer that audits call counts, coordinate
activation, and linear-span discipline.
"""

from .backends import backend_name, use_numba
from .catalyst import (
    CatalystConfig,
    CatalystResult,
    InnerLoopError,
    build_aux_problem,
    build_subproblem,
    catalyst_run,
    default_tau,
    inner_loop,
    moreau_stationarity,
)
from .core import (
    OracleError,
    OracleLog,
    RunTrace,
    SaddlePoint,
    SaddleProblem,
    SpanProtocolError,
    TraceRow,
    finite_difference_check,
    wrap_with_logging,
)
from .harness import (
    ExperimentConfig,
    kappa_sweep,
    lower_bound_suite,
    n_sweep,
    read_csv,
    run_single,
    verify_all,
    write_csv,
)
from .instances import (
    ChainMatrix,
    HardInstanceSpec,
    estimate_primal_infimum,
    estimate_smoothness,
    gamma,
    gamma_prime,
    make_bilinear,
    make_case1_instance,
    make_deterministic_instance,
    make_finite_sum_instance,
    make_quadratic_saddle,
)
from .metrics import (
    AlgorithmAudit,
    LowerBoundReport,
    ScalingFit,
    audit_run,
    averaged_stationarity_bound,
    fit_linear_convergence,
    fit_scaling,
    moreau_grad_norm,
    moreau_sum_bound,
    primal_grad_norm,
    proximal_point,
    verify_lower_bound,
)
from .solvers import (
    BudgetExceededError,
    DivergenceError,
    RateModel,
    SolveResult,
    SolverConfig,
    accelerated_ascent,
    alt_gda,
    extragradient,
    gda,
    get_method,
    ogda,
    solve_until,
    svrg_saddle,
)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmAudit",
    "BudgetExceededError",
    "CatalystConfig",
    "CatalystResult",
    "ChainMatrix",
    "DivergenceError",
    "ExperimentConfig",
    "HardInstanceSpec",
    "InnerLoopError",
    "LowerBoundReport",
    "OracleError",
    "OracleLog",
    "RateModel",
    "RunTrace",
    "SaddlePoint",
    "SaddleProblem",
    "ScalingFit",
    "SolveResult",
    "SolverConfig",
    "SpanProtocolError",
    "TraceRow",
    "accelerated_ascent",
    "alt_gda",
    "audit_run",
    "averaged_stationarity_bound",
    "backend_name",
    "build_aux_problem",
    "build_subproblem",
    "catalyst_run",
    "default_tau",
    "estimate_primal_infimum",
    "estimate_smoothness",
    "extragradient",
    "finite_difference_check",
    "fit_linear_convergence",
    "fit_scaling",
    "gamma",
    "gamma_prime",
    "gda",
    "get_method",
    "inner_loop",
    "kappa_sweep",
    "lower_bound_suite",
    "make_bilinear",
    "make_case1_instance",
    "make_deterministic_instance",
    "make_finite_sum_instance",
    "make_quadratic_saddle",
    "moreau_grad_norm",
    "moreau_stationarity",
    "moreau_sum_bound",
    "n_sweep",
    "ogda",
    "primal_grad_norm",
    "proximal_point",
    "read_csv",
    "run_single",
    "solve_until",
    "svrg_saddle",
    "use_numba",
    "verify_all",
    "verify_lower_bound",
    "wrap_with_logging",
    "write_csv",
]

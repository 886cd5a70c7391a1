"""Two-stage nonlinear stochastic programming toolkit.

Mirror descent with certified inexact second-stage solves, exact and
inexact cutting planes for recourse value functions, strong-concavity
constants for dual functions, and SAA / L-shaped baselines with a seeded
experiment harness.
"""

from .baselines import (
    LpResult,
    LShapedResult,
    SaaConfig,
    SaaResult,
    dense_lp_solve,
    lshaped_solve,
    saa_solve,
)
from .cuts import (
    Cut,
    CutProblemData,
    applicable_cases,
    cut_corollary,
    cut_fixed_l1,
    cut_fixed_strong,
    cut_variable_l2,
    cut_variable_strong,
    exact_cut,
    validate_cut,
)
from .geometry import (
    ENTROPY,
    EUCLIDEAN,
    Ball,
    Simplex,
    bregman,
    omega_center,
    omega_radius,
    prox_step,
)
from .instances import (
    InstanceSpec,
    TwoStageInstance,
    generate_instance,
    quadratic_scenario,
)
from .ismd import (
    CapSchedule,
    ExactAccuracy,
    IsmdConfig,
    IsmdRun,
    RateBoundInputs,
    TheorySchedule,
    assemble_gradient,
    iteration_cap,
    rate_bound,
    run,
    suggested_theta1,
    ubar_constant,
)
from .numkit import (
    RngStream,
    eigen_extremes,
    gaussian_vector,
    project_simplex,
    spd_solve,
    spectral_norm,
)
from .second_stage import (
    BallStage,
    RankOneBatch,
    Scenario,
    SecondStageSolveReport,
    SimplexStage,
    dual_function_value,
    multiplier_bound,
    oracle_solve,
    oracle_values,
    solve_ball_stage,
    solve_simplex_stage,
    solve_stage,
)
from .strong_concavity import (
    ConcavityCertificate,
    ball_stage_concavity,
    linear_constraints_constant,
    local_theorem_constant,
    quad_quad_constant,
    verify_concavity,
)

__version__ = "0.1.0"

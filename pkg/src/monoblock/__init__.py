"""Block monotone solvers for coupled two-component reaction-diffusion systems.

Implicit upwind finite differences on a rectangle, marched level by level;
each level is solved by block monotone Jacobi or Gauss-Seidel iteration
between constructed upper and lower solutions, which yields ordered
two-sided bounds on the discrete solution at every iterate. A dense Newton
oracle provides independent verification on small meshes.
"""

from .blocksolve import (
    TriDiag,
    TriFactor,
    check_dominance,
    dominance_margin,
    factor_tridiag,
    inverse_positivity_check,
    solve_factored,
    solve_tridiag,
)
from .brackets import (
    Bracket,
    ConstructionError,
    ConstructionRule,
    auxiliary_upper_rule,
    build_bracket,
    build_trajectory,
    constant_upper_rule,
    linear_upper_rule,
    lower_zero,
    upper_constant,
    upper_linear,
    zero_lower_rule,
)
from .discretization import (
    LineBlockSystem,
    StencilCoeffs,
    assemble_line,
    fold_boundary,
    residual_field,
    residual_line,
    residual_norm,
    stencil_coeffs,
    stencil_violations,
)
from .mesh import Mesh, MeshSpec, build_mesh, classify
from .models import (
    MODEL_NAMES,
    BelousovZhabotinskiiParams,
    EnzymeSubstrateParams,
    GasLiquidParams,
    VolterraLotkaParams,
    default_bracket,
    default_sector,
    exact_trajectory,
    instantiate,
    manufactured_bracket,
    manufactured_problem,
    params_from_dict,
    synthetic_bounds_problem,
)
from .monotone import (
    MarchResult,
    MonotoneIterationError,
    SolveReport,
    SweepVariant,
    TauCheck,
    TimeStepPolicy,
    check_tau_restriction,
    march,
    ordered_pair_violations,
    step_nondecreasing,
    step_nonincreasing,
    verify_ordered_pair,
)
from .oracle import (
    NewtonConfig,
    OracleError,
    convergence_order,
    dense_solve,
    manufactured_regime,
    newton_march,
    newton_solve_level,
)
from .reaction import (
    ProblemSpec,
    QuasiMonotoneClass,
    c_level,
    check_class_certificate,
    constant_field,
    constant_space,
    g_pair,
    gamma,
    lambda_shift,
    psi_pair,
)

__version__ = "0.1.0"

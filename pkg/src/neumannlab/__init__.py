"""Least-energy solutions of pure-Neumann Lane-Emden systems on radial domains.

The coupled system -Lap u = |v|^(q-1) v, -Lap v = |u|^(p-1) u with no-flux
boundary data is solved through its dual formulation: the level
D = sup int f K g over mean-zero densities with Lebesgue-norm constraints,
whose reciprocal is the nonlinear Neumann eigenvalue Lambda and whose
maximizers reconstruct the least-energy solution pair.  The sign-limit
p = 0 (and the scalar limit p = q = 0) is handled by a fixed point over
balanced level sets, and the closed-form radial solutions of the biharmonic
sign problem certify symmetry breaking on balls.
"""

from .closed_form import (
    asymptotic_bound,
    competitor_energy,
    eval_u,
    eval_v,
    h2,
    m_rad,
    m_rad_quadrature,
    symmetry_breaking_verdict,
    table1,
    zero_radius,
)
from .dual import (
    DualPair,
    NonConvergenceError,
    SolutionReport,
    SolverOptions,
    compute_dual,
    compute_lambda,
    delta_lower_bound,
    oracle_dual_smallgrid,
    reconstruct_solution,
)
from .exponents import (
    ExponentPair,
    HyperbolaError,
    Region,
    c_from_lambda,
    classify_region,
    lambda_from_c,
    primal_scaling,
)
from .experiments import (
    ClassificationReport,
    FrakCReport,
    PqToZeroReport,
    SweepSpec,
    check_pq_to_0,
    classify_pq_to_1,
    continuation_lambda,
    estimate_frak_c,
    ls_upper_bounds,
    run_sweep,
)
from .greens import (
    CompatibilityError,
    apply_K_t,
    balanced_shift,
    kappa_shift,
    solve_neumann,
)
from .grid import (
    GridFunction,
    RadialGrid,
    discrete_radial_laplacian,
    integrate,
    interval_grid,
    lp_norm,
    make_grid,
    unit_ball_grid,
)
from .sign import (
    BalancedFunction,
    OscillationDetected,
    certify_balanced,
    sign_of,
    solve_scalar_sign,
    solve_sign_system,
)

__version__ = "0.1.0"

"""Solvers for second-kind Fredholm equations with oscillatory kernels.

The package discretizes y(s) - int_I K(s,t) e^{i*kappa*|s-t|} y(t) dt = f(s)
on I = [-1, 1] with spline Galerkin methods: the conventional method on a
plain B-spline space and the oscillation preserving method on the space
enriched with the carriers e^{+/- i*kappa*s}.  Assembly is closed-form for
polynomial data, so its cost does not grow with the wavenumber.

Modules
-------
bspline   knot vectors, B-spline bases, Gram matrices, linear interpolation
oscquad   oscillatory quadrature: exact moments, Filon rules, reference rule
linalg    dense complex LU, norms, 2-norm condition estimation
galerkin  trial spaces, system assembly, solve, error metrics
problems  benchmark problem, manufactured solutions, oscillation experiment
cli       batch experiment runner (``oscfred`` command)
"""

from .bspline import (
    KnotVector,
    PiecewiseLinearInterpolant,
    SplineSpace,
    gram_matrix,
    interp_linear,
    make_knots,
    make_uniform_knots,
    max_error_on_grid,
)
from .galerkin import (
    CGM_MULTIPLIERS,
    EN_GRID,
    OPGM_MULTIPLIERS,
    DiscreteSystem,
    OscKernel,
    StructuredFunction,
    TrialSpace,
    apply_kernel_structured,
    assemble_mass,
    assemble_operator,
    assemble_rhs,
    assemble_system,
    convergence_order,
    eval_solution,
    relative_error_eN,
    relative_error_l2,
    solve_system,
)
from .linalg import (
    LUFactorization,
    SingularMatrixError,
    cond2,
    lu_factor,
    lu_solve,
    matrix_norms,
)
from .oscquad import (
    Polynomial,
    SmoothAmplitude,
    filon_integral,
    gauss_legendre,
    oscillatory_quad,
    poly_exp_moment,
    sigma_n,
    sigma_polynomial,
)
from .problems import (
    GalerkinRun,
    OscProbeFunction,
    Problem,
    manufactured,
    paper_benchmark,
    run_galerkin,
    table1_experiment,
)

__version__ = "0.1.0"

"""Green functions for linear boundary value problems with local and nonlocal conditions.

The Green function is built as G = E - (boundary correction), where E is a
fundamental solution and the correction solves a boundary-response system.
"""

from .assembly import (
    GreenOperator,
    adjoint_green,
    assemble_g,
    assemble_h,
    boundary_density,
    dirichlet_green,
    eval_dG,
    eval_G,
    eval_G_adjoint,
    verify_right_action,
)
from .boundary import (
    BoundaryConditionSet,
    BoundaryFunction,
    Local1D,
    LocalField2D,
    NonlocalKernel,
    SpinorBoundaryFunction,
    apply_B,
    apply_B_adjoint_dagger,
    constant_kernel,
    cosine_kernel,
    trace_E,
)
from .bvp import BoundaryData, Constant, Gaussian, Polynomial, Sine, Zero, residual_report, solve_bvp
from .errors import (
    ConfigError,
    EigenvalueParameters,
    GreenError,
    IllPosed,
    InvalidDomain,
    PointOnBoundary,
    ShapeMismatch,
    SingularBlock,
    SingularEvaluation,
    SingularMatrix,
    SingularSystem,
    StageSingular,
    Unsupported,
)
from .fundamental import Helmholtz1D, Helmholtz2D, Laplace2D, ModifiedHelmholtz1D, eval_dE, eval_E, eval_E_adjoint
from .geometry import Circle, Ellipse, Interval, discretize_boundary, discretize_volume
from .recursive import BlockMatrix2x2, block_inverse, recursive_green, recursive_state, stage_residual

__version__ = "0.1.0"

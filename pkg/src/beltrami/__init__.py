"""High-order Laplace-Beltrami solver on piecewise-smooth surfaces of revolution.

The surface problem decouples into periodic ODEs per azimuthal Fourier mode;
each ODE is solved through a second-kind integral equation discretized by a
panel-based Nystrom method with adaptive dyadic refinement at surface edges.
"""

from .azimuthal import FourierStack, decompose, synthesize, theta_derivative
from .errors import BeltramiError
from .geometry import (
    CurvePoint,
    GeneratingCurve,
    circular_torus,
    curve_from_catalog,
    polygon_toroid,
    unit_square_toroid,
)
from .hodge import (
    HodgeDecomposition,
    harmonic_basis,
    hodge_decompose,
    project_residual,
    rotate,
    surface_divergence,
)
from .kernels import KernelKind, g_poisson, g_poisson_deriv, g_yukawa, g_yukawa_deriv
from .linalg import LinearOperator, SolveReport, gmres, weighted_embedding
from .periodic_ode import ModeSolution, NystromSystem, PeriodicODEProblem, assemble, solve
from .quadrature import PanelMesh, build_mesh, dyadic_refine, gauss_legendre, lagrange_interp, split_rule
from .surface_solver import (
    LBSolution,
    SurfaceScalarField,
    TangentVectorField,
    mesh_for_curve,
    power_singular_field,
    relative_l2_error,
    restrict_newtonian,
    solve_lb,
    surface_gradient,
)

__version__ = "0.1.0"

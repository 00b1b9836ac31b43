"""Laplace-Beltrami solves on surfaces of revolution by azimuthal decoupling.

Each Fourier mode n of Delta_Gamma u = f satisfies the periodic ODE

    u_n'' + (r'/r) u_n' - (n^2/r^2) u_n = f_n      on [0, L],

solved through the second-kind integral equation machinery; the n = 0 mode has
q = 0 and carries the surface mean-zero constraint integral(u_0 r) = 0.  Real
data is solved for n >= 0 only, negative modes follow by conjugation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import azimuthal
from .azimuthal import FourierStack, decompose, synthesize, theta_grid
from .errors import (
    DegenerateReferenceError,
    ParameterError,
    SolvabilityError,
)
from .geometry import GeneratingCurve
from .kernels import make_kernel
from .linalg import SolveReport
from .periodic_ode import (
    DENSE_THRESHOLD,
    LayerOperators,
    ModeSolution,
    PeriodicODEProblem,
    assemble,
    solve,
)
from .quadrature import PanelMesh, build_mesh

MODE_RELATIVE_CUTOFF = 1e-15


def mesh_for_curve(curve: GeneratingCurve, panels_per_segment: int, order: int = 16) -> PanelMesh:
    """Uniform mesh whose panel boundaries include every curve breakpoint."""
    return build_mesh(curve.L, panels_per_segment, curve.breakpoints, order=order)


def surface_node_weights(curve: GeneratingCurve, mesh: PanelMesh, n_theta: int) -> np.ndarray:
    """Per-s-node surface quadrature weights w_ij r_ij (2 pi / n_theta)."""
    r = curve.sample(mesh.flat_nodes).r
    return mesh.flat_weights * r * (2 * np.pi / n_theta)


class SurfaceScalarField:
    """Scalar field on the (n_theta x n_s) tensor grid plus its Fourier stack."""

    def __init__(self, curve, mesh, grid=None, stack: Optional[FourierStack] = None):
        if grid is None and stack is None:
            raise ParameterError("provide a grid, a stack, or both")
        self.curve = curve
        self.mesh = mesh
        if grid is None:
            grid = synthesize(stack)
        self.grid = np.asarray(grid, dtype=float)
        if self.grid.shape[1] != mesh.n_nodes:
            raise ParameterError("grid column count must match the mesh node count")
        self.stack = stack if stack is not None else decompose(self.grid, mesh=mesh)

    @classmethod
    def from_function(cls, curve, mesh, n_theta: int, fn) -> "SurfaceScalarField":
        """Sample fn(theta, s) on the tensor grid (theta equispaced, s at mesh nodes)."""
        theta = theta_grid(n_theta)
        grid = fn(theta[:, None], mesh.flat_nodes[None, :])
        grid = np.broadcast_to(np.asarray(grid, dtype=float), (n_theta, mesh.n_nodes)).copy()
        return cls(curve, mesh, grid=grid)

    @property
    def n_theta(self) -> int:
        return self.grid.shape[0]

    def node_weights(self) -> np.ndarray:
        return surface_node_weights(self.curve, self.mesh, self.n_theta)

    def integral(self) -> float:
        """Surface integral over Gamma."""
        return float(np.sum(self.node_weights()[None, :] * self.grid))

    def norm(self) -> float:
        """L^2(Gamma) norm."""
        return float(np.sqrt(np.sum(self.node_weights()[None, :] * self.grid**2)))

    def __add__(self, other):
        return SurfaceScalarField(self.curve, self.mesh, grid=self.grid + other.grid)

    def __sub__(self, other):
        return SurfaceScalarField(self.curve, self.mesh, grid=self.grid - other.grid)

    def __neg__(self):
        return SurfaceScalarField(self.curve, self.mesh, grid=-self.grid)

    def __mul__(self, scalar):
        return SurfaceScalarField(self.curve, self.mesh, grid=self.grid * float(scalar))

    __rmul__ = __mul__


class TangentVectorField:
    """Tangential field F = F_s s_hat + F_theta theta_hat in the orthonormal frame."""

    def __init__(self, comp_s: SurfaceScalarField, comp_theta: SurfaceScalarField):
        self.comp_s = comp_s
        self.comp_theta = comp_theta
        self.curve = comp_s.curve
        self.mesh = comp_s.mesh

    @property
    def n_theta(self) -> int:
        return self.comp_s.n_theta

    def norm(self) -> float:
        return float(np.sqrt(self.comp_s.norm() ** 2 + self.comp_theta.norm() ** 2))

    def __sub__(self, other):
        return TangentVectorField(self.comp_s - other.comp_s, self.comp_theta - other.comp_theta)

    def __add__(self, other):
        return TangentVectorField(self.comp_s + other.comp_s, self.comp_theta + other.comp_theta)

    def __neg__(self):
        return TangentVectorField(-self.comp_s, -self.comp_theta)

    def __mul__(self, scalar):
        return TangentVectorField(self.comp_s * scalar, self.comp_theta * scalar)

    __rmul__ = __mul__


@dataclass
class LBSolution:
    """Solved surface field plus the per-mode densities kept for derivatives."""

    field: SurfaceScalarField
    modes: dict  # n (>= 0) -> ModeSolution
    reports: dict  # n (>= 0) -> SolveReport
    kernel_tag: str

    @property
    def curve(self):
        return self.field.curve

    @property
    def mesh(self):
        return self.field.mesh

    @property
    def n_theta(self):
        return self.field.n_theta

    def max_iterations(self) -> int:
        return max((rep.iterations for rep in self.reports.values()), default=0)

    def surface_mean(self) -> float:
        return self.field.integral()


def solve_lb(
    curve: GeneratingCurve,
    mesh: PanelMesh,
    f: SurfaceScalarField,
    kernel: str = "poisson",
    method: str = "gmres",
    gmres_tol: float = 1e-14,
    max_iter=None,
    mean_tol: float = 1e-10,
    dense_threshold: int = DENSE_THRESHOLD,
    mode_cutoff: float = MODE_RELATIVE_CUTOFF,
) -> LBSolution:
    """Solve Delta_Gamma u = f for the mean-zero u.

    The discrete surface mean of f must vanish to ``mean_tol`` (relative);
    anything smaller is projected out of the n = 0 coefficient, since the range
    of the operator excludes constants.
    """
    mesh.require_boundaries(curve.breakpoints)
    data = curve.sample(mesh.flat_nodes)
    r = data.r
    p_vals = data.dr / r
    w = mesh.flat_weights
    n_theta = f.n_theta
    stack = f.stack

    c0 = stack.mode(0)
    area = 2 * np.pi * np.sum(w * r)
    mean_f = 2 * np.pi * np.sum(w * r * np.real(c0))
    fnorm = f.norm()
    if fnorm > 0:
        rel_mean = abs(mean_f) / (fnorm * np.sqrt(area))
        if rel_mean > mean_tol:
            raise SolvabilityError(
                f"surface mean of f is {rel_mean:.3e} (relative), beyond {mean_tol:.1e}; "
                "the range of the surface Laplacian excludes constants"
            )

    cutoff = mode_cutoff * stack.max_abs()
    half = n_theta // 2
    layers = LayerOperators(mesh, make_kernel(kernel, curve.L),
                            dense=mesh.n_nodes <= dense_threshold)

    def p_fn(s, _c=curve):
        d = _c.sample(s)
        return d.dr / d.r

    modes: dict[int, ModeSolution] = {}
    reports: dict[int, SolveReport] = {}
    half_modes: dict[int, np.ndarray] = {}
    for n in range(0, half + 1):
        fn = stack.mode(n) if n < half else stack.coeffs[half]
        if np.max(np.abs(fn)) <= cutoff:
            continue
        if n == 0:
            fn = fn - mean_f / area  # project out the aliasing-level mean
            problem = PeriodicODEProblem(
                L=curve.L, p=p_fn, q=None, f=None,
                constraint=(lambda s, _c=curve: _c.sample(s).r, 0.0),
                kernel=kernel, breakpoints=tuple(curve.breakpoints),
            )
            q_vals = None
        else:
            problem = PeriodicODEProblem(
                L=curve.L, p=p_fn,
                q=lambda s, _n=n, _c=curve: -(_n**2) / _c.sample(s).r ** 2,
                f=None, kernel=kernel, breakpoints=tuple(curve.breakpoints),
            )
            q_vals = -(n**2) / r**2
        system = assemble(
            problem, mesh,
            f_values=fn, p_values=p_vals, q_values=q_vals,
            layers=layers, dense_threshold=dense_threshold,
        )
        sol = solve(system, method=method, tol=gmres_tol, max_iter=max_iter)
        modes[n] = sol
        reports[n] = sol.report
        half_modes[n] = sol.u_at_nodes()

    u_stack = FourierStack.from_half_modes(half_modes, n_theta, mesh.n_nodes, mesh=mesh)
    field = SurfaceScalarField(curve, mesh, stack=u_stack)
    return LBSolution(field=field, modes=modes, reports=reports, kernel_tag=kernel)


def surface_gradient(sol: LBSolution) -> TangentVectorField:
    """grad_Gamma u = (du/ds) s_hat + (1/r)(du/dtheta) theta_hat, mode by mode.

    The s-derivative comes from the derivative layer potential of each mode's
    density; the theta-derivative is multiplication by (i n).
    """
    mesh = sol.mesh
    curve = sol.curve
    r = curve.sample(mesh.flat_nodes).r
    n_theta = sol.n_theta
    comp_s: dict[int, np.ndarray] = {}
    comp_t: dict[int, np.ndarray] = {}
    for n, mode in sol.modes.items():
        u_n = sol.field.stack.mode(n) if n < n_theta // 2 else sol.field.stack.coeffs[n_theta // 2]
        comp_s[n] = mode.du_at_nodes()
        # the unpaired Nyquist mode has no meaningful theta derivative
        comp_t[n] = (1j * n / r) * u_n if n < n_theta // 2 else np.zeros_like(u_n)
    s_stack = FourierStack.from_half_modes(comp_s, n_theta, mesh.n_nodes, mesh=mesh)
    t_stack = FourierStack.from_half_modes(comp_t, n_theta, mesh.n_nodes, mesh=mesh)
    return TangentVectorField(
        SurfaceScalarField(curve, mesh, stack=s_stack),
        SurfaceScalarField(curve, mesh, stack=t_stack),
    )


def restrict_newtonian(curve: GeneratingCurve, center, n_theta: int, mesh: PanelMesh):
    """Manufactured solution from the Newtonian potential v = -1/|x - x0|.

    Returns (u_exact, f) with u_exact = v|_Gamma minus its discrete surface
    mean and f = Delta v - 2H dv/dn - d2v/dn2 evaluated analytically
    (Delta v = 0 off-center).  f also has its discrete mean removed, the
    consistent-discretization projection onto the solvable range.
    """
    center = np.asarray(center, dtype=float)
    data = curve.sample(mesh.flat_nodes)
    theta = theta_grid(n_theta)
    ct, st = np.cos(theta)[:, None], np.sin(theta)[:, None]

    X = np.stack([data.r[None, :] * ct, data.r[None, :] * st,
                  np.broadcast_to(data.z[None, :], (n_theta, mesh.n_nodes))])
    d = X - center[:, None, None]
    dist = np.sqrt(np.sum(d**2, axis=0))
    if np.min(dist) < 1e-9:
        raise SolvabilityError("potential center lies on the surface")

    v = -1.0 / dist
    grad_v = d / dist**3
    nvec = np.stack([data.dz[None, :] * ct, data.dz[None, :] * st,
                     np.broadcast_to(-data.dr[None, :], (n_theta, mesh.n_nodes))])
    dv_dn = np.sum(nvec * grad_v, axis=0)
    n_dot_d = np.sum(nvec * d, axis=0)
    # hessian of -1/|d| contracted twice with the normal
    d2v_dn2 = 1.0 / dist**3 - 3.0 * n_dot_d**2 / dist**5

    H = curve.mean_curvature(mesh.flat_nodes)[None, :]
    f_grid = -2.0 * H * dv_dn - d2v_dn2

    weights = surface_node_weights(curve, mesh, n_theta)
    area = float(np.sum(weights) * n_theta)
    u_grid = v - np.sum(weights[None, :] * v) / area
    f_grid = f_grid - np.sum(weights[None, :] * f_grid) / area

    return (
        SurfaceScalarField(curve, mesh, grid=u_grid),
        SurfaceScalarField(curve, mesh, grid=f_grid),
    )


class PowerSingularField:
    """Sampler f(theta, s) = sin(m theta) |s - s0|^alpha, singular at a surface edge."""

    def __init__(self, alpha: float, s0: float, m: int):
        if not -1.0 < alpha < 0.0:
            raise ParameterError("exponent must lie in (-1, 0)")
        if m == 0:
            raise ParameterError("azimuthal wavenumber must be nonzero for mean-zero data")
        self.alpha = float(alpha)
        self.s0 = float(s0)
        self.m = int(m)
        self.singular_points = (self.s0,)

    def __call__(self, theta, s):
        return np.sin(self.m * theta) * np.abs(s - self.s0) ** self.alpha

    def realize(self, curve: GeneratingCurve, mesh: PanelMesh, n_theta: int) -> SurfaceScalarField:
        if curve.breakpoints.size == 0 or np.min(np.abs(curve.breakpoints - self.s0)) > 1e-12:
            warnings.warn(
                "singular point is not a curve breakpoint; dyadic refinement "
                "cannot be targeted at it",
                stacklevel=2,
            )
        mesh.require_boundaries([self.s0])
        return SurfaceScalarField.from_function(curve, mesh, n_theta, self)


def power_singular_field(alpha: float, s0: float, m: int) -> PowerSingularField:
    return PowerSingularField(alpha, s0, m)


def relative_l2_error(a: SurfaceScalarField, b: SurfaceScalarField) -> float:
    """Relative L^2(Gamma) error of ``a`` against the reference ``b``."""
    if a.grid.shape != b.grid.shape:
        raise ParameterError("fields must share the same grid")
    weights = b.node_weights()[None, :]
    denom = np.sum(weights * b.grid**2)
    if denom == 0.0:
        raise DegenerateReferenceError("reference field has zero norm")
    return float(np.sqrt(np.sum(weights * (a.grid - b.grid) ** 2) / denom))

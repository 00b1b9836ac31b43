"""Tangential vector calculus and Hodge decomposition on surfaces of revolution.

F = grad_Gamma(alpha) + n x grad_Gamma(beta) + H, where alpha and beta solve
Delta_Gamma alpha = div F and Delta_Gamma beta = -div(n x F), and H is
harmonic.  The frame is right-handed with n x s_hat = theta_hat, so the
rotation acts as (F_s, F_theta) -> (-F_theta, F_s).  On genus-one surfaces the
harmonic space is spanned by H1 = (1/r) s_hat and H2 = -(1/r) theta_hat.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .azimuthal import FourierStack, mode_numbers, synthesize, theta_derivative
from .errors import GeometryError, ParameterError
from .geometry import GeneratingCurve
from .quadrature import PanelMesh, diff_matrix, interp_matrix
from .surface_solver import (
    LBSolution,
    SurfaceScalarField,
    TangentVectorField,
    solve_lb,
    surface_gradient,
)


def panel_derivative(mesh: PanelMesh, values: np.ndarray, method: str = "legendre") -> np.ndarray:
    """d/ds of the per-panel degree (k-1) interpolant of nodal ``values``.

    "legendre" differentiates the Legendre-node interpolant in place;
    "chebyshev" resamples each panel to Chebyshev points, differentiates
    there, and maps back.  Both act on the same polynomial space.
    """
    k = mesh.order
    vals = np.asarray(values).reshape(mesh.n_panels, k)
    ref_x, _ = np.polynomial.legendre.leggauss(k)
    if method == "legendre":
        D = diff_matrix(ref_x)
    elif method == "chebyshev":
        cheb = np.cos(np.pi * np.arange(k) / (k - 1))[::-1]
        to_cheb = interp_matrix(ref_x, cheb)
        back = interp_matrix(cheb, ref_x)
        D = back @ diff_matrix(cheb) @ to_cheb
    else:
        raise ParameterError(f"unknown differentiation method {method!r}")
    widths = np.diff(mesh.boundaries)
    out = (vals @ D.T) * (2.0 / widths)[:, None]
    return out.reshape(-1)


def surface_divergence(F: TangentVectorField, method: str = "legendre") -> SurfaceScalarField:
    """div_Gamma F = dF_s/ds + (r'/r) F_s + (1/r) dF_theta/dtheta, mode by mode."""
    mesh = F.mesh
    curve = F.curve
    data = curve.sample(mesh.flat_nodes)
    r, dr = data.r, data.dr

    s_stack = F.comp_s.stack
    dsF = np.empty_like(s_stack.coeffs)
    for row in range(s_stack.n_theta):
        dsF[row] = (panel_derivative(mesh, s_stack.coeffs[row].real, method)
                    + 1j * panel_derivative(mesh, s_stack.coeffs[row].imag, method))
    dtF = theta_derivative(F.comp_theta.stack).coeffs
    coeffs = dsF + (dr / r)[None, :] * s_stack.coeffs + dtF / r[None, :]
    return SurfaceScalarField(curve, mesh, stack=FourierStack(coeffs, mesh=mesh))


def rotate(F: TangentVectorField) -> TangentVectorField:
    """n x F = -F_theta s_hat + F_s theta_hat (an L^2 isometry with rotate^2 = -id)."""
    return TangentVectorField(-F.comp_theta, F.comp_s)


def harmonic_basis(curve: GeneratingCurve, mesh: PanelMesh, n_theta: int):
    """The analytic harmonic fields H1 = (1/r) s_hat and H2 = -(1/r) theta_hat."""
    r = curve.sample(mesh.flat_nodes).r
    inv_r = np.broadcast_to(1.0 / r, (n_theta, mesh.n_nodes)).copy()
    zero = np.zeros_like(inv_r)
    H1 = TangentVectorField(
        SurfaceScalarField(curve, mesh, grid=inv_r),
        SurfaceScalarField(curve, mesh, grid=zero),
    )
    H2 = TangentVectorField(
        SurfaceScalarField(curve, mesh, grid=zero.copy()),
        SurfaceScalarField(curve, mesh, grid=-inv_r),
    )
    return H1, H2


def inner(F: TangentVectorField, G: TangentVectorField) -> float:
    """L^2(Gamma) inner product of tangential fields."""
    w = F.comp_s.node_weights()[None, :]
    return float(np.sum(w * (F.comp_s.grid * G.comp_s.grid
                             + F.comp_theta.grid * G.comp_theta.grid)))


@dataclass
class HodgeDecomposition:
    """Curl-free, divergence-free, and harmonic parts of a tangential field."""

    alpha: LBSolution
    beta: LBSolution
    grad_alpha: TangentVectorField
    rot_grad_beta: TangentVectorField
    harmonic: TangentVectorField


def hodge_decompose(F: TangentVectorField, method: str = "legendre",
                    mean_check: float = 1e-9, **solve_opts) -> HodgeDecomposition:
    """Split F via two Laplace-Beltrami solves; H = F - grad(alpha) - n x grad(beta).

    On a closed surface both divergences integrate to zero; this is verified
    numerically against the scale of F (so harmonic inputs, whose divergences
    are pure roundoff, are not rejected) and the roundoff-level mean is
    projected out before the solves.
    """
    curve, mesh = F.curve, F.mesh
    div_F = surface_divergence(F, method=method)
    div_nxF = surface_divergence(rotate(F), method=method)

    area = float(np.sum(F.comp_s.node_weights()) * F.n_theta)
    scale_floor = F.norm() / max(curve.L, 1.0)
    projected = []
    for g in (div_F, -div_nxF):
        mean = g.integral()
        rel = abs(mean) / (np.sqrt(area) * max(g.norm(), scale_floor, 1e-300))
        if rel > mean_check:
            raise ParameterError(
                f"divergence has surface mean {rel:.3e} relative; field is not tangential "
                "to a closed surface of revolution"
            )
        projected.append(g - SurfaceScalarField(
            curve, mesh, grid=np.full_like(g.grid, mean / area)))

    alpha = solve_lb(curve, mesh, projected[0], **solve_opts)
    beta = solve_lb(curve, mesh, projected[1], **solve_opts)
    grad_alpha = surface_gradient(alpha)
    rot_grad_beta = rotate(surface_gradient(beta))
    harmonic = F - grad_alpha - rot_grad_beta
    return HodgeDecomposition(alpha, beta, grad_alpha, rot_grad_beta, harmonic)


def project_residual(H: TangentVectorField, basis, reference_norm: float) -> float:
    """Relative L^2 norm of H minus its least-squares projection onto ``basis``."""
    if not reference_norm > 0:
        raise ParameterError("reference norm must be positive")
    H1, H2 = basis
    gram = np.array([[inner(H1, H1), inner(H1, H2)], [inner(H2, H1), inner(H2, H2)]])
    rhs = np.array([inner(H1, H), inner(H2, H)])
    if abs(np.linalg.det(gram)) < 1e-30:
        raise GeometryError("degenerate harmonic basis Gram matrix")
    c = np.linalg.solve(gram, rhs)
    remainder = H - c[0] * H1 - c[1] * H2
    return remainder.norm() / reference_norm

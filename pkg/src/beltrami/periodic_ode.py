"""Second-kind integral-equation solver for periodic ODEs u'' + p u' + q u = f.

The solution is represented through the periodic kernel G as
u = S[sigma - mean(sigma)] + mean(sigma) (Poisson kernel, where S is mean-zero
preserving) or u = S sigma (Yukawa kernel), which turns the ODE into an
identity-plus-compact equation for the density sigma enforced at the panel
quadrature nodes.  Same-panel integrals are split at the collocation node and
evaluated with mapped Gauss rules on interpolated densities; all systems are
conjugated by the sqrt(w) embedding so the discrete 2-norm tracks L^2([0, L]).

With q = 0 the ODE fixes u only up to a constant, so a linear constraint
integral(u w) = A is folded into every collocation row as a rank-one update.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import MeshError, ParameterError, SolverError, WellPosednessError
from .kernels import KernelKind, make_kernel
from .linalg import LinearOperator, SolveReport, dense_solve, gmres, weighted_embedding
from .quadrature import PanelMesh, bary_weights, interp_matrix, split_rule

DENSE_THRESHOLD = 2048


def _as_sampler(fn):
    """Allow scalars wherever a coefficient sampler is expected."""
    if callable(fn):
        return fn
    value = complex(fn) if np.iscomplexobj(fn) else float(fn)
    return lambda x: np.full(np.shape(x), value)


@dataclass
class PeriodicODEProblem:
    """u'' + p u' + q u = f on [0, L] with periodic boundary conditions.

    ``q=None`` means q is identically zero, in which case ``constraint``
    = (w, A) for integral(u w) = A is mandatory.  ``breakpoints`` lists the
    discontinuity/singularity locations of p, q, f; meshes must place panel
    boundaries there.
    """

    L: float
    p: Callable | float
    q: Callable | float | None
    f: Callable | float | None
    constraint: Optional[tuple] = None
    kernel: KernelKind | str = "poisson"
    breakpoints: tuple = ()

    def __post_init__(self):
        if not self.L > 0:
            raise ParameterError("period must be positive")
        self.kernel = make_kernel(self.kernel, self.L)
        if self.q is None and self.constraint is None:
            raise WellPosednessError(
                "q = 0 leaves the solution defined up to a constant; a constraint is required"
            )
        if self.q is not None and self.constraint is not None:
            raise WellPosednessError("a constraint may only be combined with q = 0")


class LayerOperators:
    """Discretized single-layer value (S) and derivative (D) operators on a mesh.

    Dense mode stores the full matrices; matrix-free mode regenerates panel row
    blocks on the fly.  Near-field blocks (the k = i panel integrals) are always
    precomputed and cached.
    """

    def __init__(self, mesh: PanelMesh, kernel: KernelKind, dense: bool = True):
        self.mesh = mesh
        self.kernel = kernel
        self.dense = dense
        self._near_S, self._near_D = _near_blocks(mesh, kernel)
        self.S = self.D = None
        if dense:
            self.S, self.D = self._full_matrices()

    def _full_matrices(self):
        x = self.mesh.flat_nodes
        w = self.mesh.flat_weights
        diff = x[:, None] - x[None, :]
        S = self.kernel.value(diff) * w[None, :]
        D = self.kernel.deriv(diff, side="+") * w[None, :]
        k = self.mesh.order
        for i in range(self.mesh.n_panels):
            sl = slice(i * k, (i + 1) * k)
            S[sl, sl] = self._near_S[i]
            D[sl, sl] = self._near_D[i]
        return S, D

    def sd_apply(self, v):
        """(S v, D v) in one pass."""
        if self.dense:
            return self.S @ v, self.D @ v
        x = self.mesh.flat_nodes
        w = self.mesh.flat_weights
        k = self.mesh.order
        wv = w * v
        Sv = np.empty_like(np.asarray(v, dtype=np.result_type(v, float)))
        Dv = np.empty_like(Sv)
        for i in range(self.mesh.n_panels):
            sl = slice(i * k, (i + 1) * k)
            diff = x[sl, None] - x[None, :]
            Srow = self.kernel.value(diff)
            Drow = self.kernel.deriv(diff, side="+")
            Sv[sl] = Srow @ wv
            Dv[sl] = Drow @ wv
            # replace the panel's own far-field block with the split-rule block
            Sv[sl] += (self._near_S[i] - Srow[:, sl] * w[sl][None, :]) @ v[sl]
            Dv[sl] += (self._near_D[i] - Drow[:, sl] * w[sl][None, :]) @ v[sl]
        return Sv, Dv

    def s_apply(self, v):
        return self.sd_apply(v)[0]

    def d_apply(self, v):
        return self.sd_apply(v)[1]

    def s_rmatvec(self, u):
        """S^T u, needed for discretizing constraint functionals."""
        if self.dense:
            return self.S.T @ u
        x = self.mesh.flat_nodes
        w = self.mesh.flat_weights
        k = self.mesh.order
        out = np.zeros_like(np.asarray(u, dtype=np.result_type(u, float)))
        for i in range(self.mesh.n_panels):
            sl = slice(i * k, (i + 1) * k)
            diff = x[sl, None] - x[None, :]
            Srow = self.kernel.value(diff) * w[None, :]
            Srow[:, sl] = self._near_S[i]
            out += Srow.T @ u[sl]
        return out


def _near_blocks(mesh: PanelMesh, kernel: KernelKind):
    """Split-rule blocks mapping a panel's nodal densities to the same-panel
    integrals of G and G' at each of its collocation nodes."""
    k = mesh.order
    ref_x, ref_w = np.polynomial.legendre.leggauss(k)
    half = (ref_x + 1) / 2
    near_S = np.empty((mesh.n_panels, k, k))
    near_D = np.empty((mesh.n_panels, k, k))
    for i in range(mesh.n_panels):
        a, b = mesh.boundaries[i], mesh.boundaries[i + 1]
        X = mesh.nodes[i]
        bw = bary_weights(X)
        blk_S = np.zeros((k, k))
        blk_D = np.zeros((k, k))
        for sub_a, sub_b in (((a,) * k, X), (X, (b,) * k)):
            sub_a = np.asarray(sub_a, dtype=float)
            sub_b = np.asarray(sub_b, dtype=float)
            t = sub_a[:, None] + (sub_b - sub_a)[:, None] * half[None, :]
            wq = (sub_b - sub_a)[:, None] / 2 * ref_w[None, :]
            args = X[:, None] - t
            T = interp_matrix(X, t.reshape(-1), weights=bw).reshape(k, k, k)
            blk_S += np.einsum("jl,jlm->jm", wq * kernel.value(args), T)
            blk_D += np.einsum("jl,jlm->jm", wq * kernel.deriv(args, side="+"), T)
        near_S[i] = blk_S
        near_D[i] = blk_D
    return near_S, near_D


@dataclass
class NystromSystem:
    """Assembled collocation system; immutable once built.

    The action is v -> v + p * (D v) + s_coef * (S v) + rank_col * (rank_row . v),
    conjugated by the sqrt(w) embedding for iterative solves.
    """

    mesh: PanelMesh
    kernel: KernelKind
    layers: LayerOperators
    p_vals: np.ndarray
    s_coef: Optional[np.ndarray]
    rank_col: Optional[np.ndarray]
    rank_row: Optional[np.ndarray]
    rhs: np.ndarray
    needs_D: bool = True
    _dense_A: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.mesh.n_nodes

    def apply(self, v):
        out = v.copy()
        if self.s_coef is not None or self.needs_D:
            Sv, Dv = self.layers.sd_apply(v)
            if self.needs_D:
                out += self.p_vals * Dv
            if self.s_coef is not None:
                out += self.s_coef * Sv
        if self.rank_col is not None:
            out += self.rank_col * (self.rank_row @ v)
        return out

    def dense_matrix(self) -> np.ndarray:
        if self._dense_A is None:
            if not self.layers.dense:
                raise SolverError("dense matrix requested from a matrix-free system")
            A = np.eye(self.n)
            A += self.p_vals[:, None] * self.layers.D
            if self.s_coef is not None:
                A += self.s_coef[:, None] * self.layers.S
            if self.rank_col is not None:
                A += np.outer(self.rank_col, self.rank_row)
            self._dense_A = A
        return self._dense_A


def assemble(
    problem: PeriodicODEProblem,
    mesh: PanelMesh,
    f_values=None,
    p_values=None,
    q_values=None,
    layers: LayerOperators | None = None,
    dense_threshold: int = DENSE_THRESHOLD,
) -> NystromSystem:
    """Discretize the integral equation for ``problem`` on ``mesh``.

    ``*_values`` override sampling of the corresponding coefficient at the
    mesh nodes; ``layers`` lets callers share discretized kernels between
    modes on the same mesh.
    """
    if abs(mesh.L - problem.L) > 1e-12 * max(1.0, problem.L):
        raise MeshError(f"mesh length {mesh.L} does not match problem period {problem.L}")
    if problem.breakpoints:
        try:
            mesh.require_boundaries(problem.breakpoints)
        except MeshError as exc:
            raise MeshError(f"coefficient breakpoints not resolved by the mesh: {exc}") from exc

    x = mesh.flat_nodes
    w = mesh.flat_weights
    L = problem.L
    kernel = problem.kernel
    if layers is None:
        layers = LayerOperators(mesh, kernel, dense=mesh.n_nodes <= dense_threshold)

    p_vals = np.asarray(p_values if p_values is not None else _as_sampler(problem.p)(x), dtype=float)
    if f_values is not None:
        f_vals = np.asarray(f_values)
    elif problem.f is not None:
        f_vals = np.asarray(_as_sampler(problem.f)(x))
    else:
        raise ParameterError("no right-hand side: provide problem.f or f_values")

    if problem.q is not None:
        q_vals = np.asarray(q_values if q_values is not None else _as_sampler(problem.q)(x), dtype=float)
        if kernel.has_mean_bookkeeping:
            # u = S[v - mean v] + mean v;  S kills constants, so only the
            # identity and q terms see the mean
            s_coef = q_vals
            rank_col = q_vals - 1.0
            rank_row = w / L
        else:
            # u = S v with (S v)'' - S v = v
            s_coef = 1.0 + q_vals
            rank_col = rank_row = None
        rhs = f_vals
    else:
        wc, A_c = problem.constraint
        iw = w * np.asarray(_as_sampler(wc)(x), dtype=float)
        row_S = layers.s_rmatvec(iw)
        if kernel.has_mean_bookkeeping:
            s_coef = None
            rank_col = np.ones_like(w)
            rank_row = row_S + ((iw.sum() - 1.0) / L) * w
        else:
            s_coef = np.ones_like(w)
            rank_col = np.ones_like(w)
            rank_row = row_S
        rhs = f_vals + A_c

    return NystromSystem(
        mesh=mesh,
        kernel=kernel,
        layers=layers,
        p_vals=p_vals,
        s_coef=s_coef,
        rank_col=rank_col,
        rank_row=rank_row,
        rhs=rhs,
    )


def solve(
    system: NystromSystem,
    method: str = "gmres",
    tol: float = 1e-14,
    max_iter=None,
) -> "ModeSolution":
    """Solve the assembled system for the density and attach evaluators.

    GMRES runs on the sqrt(w)-conjugated operator; complex right-hand sides
    are split into two real solves.  Non-convergence raises SolverError.
    """
    emb = weighted_embedding(system.mesh.flat_weights)
    rhs = system.rhs

    if method == "dense":
        A = system.dense_matrix()
        sigma = dense_solve(A, rhs)
        res = np.linalg.norm(A @ sigma - rhs) / max(np.linalg.norm(rhs), 1e-300)
        report = SolveReport(0, float(res), True, [float(res)])
    elif method == "gmres":
        if system.layers.dense:
            op = emb.conjugate_matrix(system.dense_matrix())
        else:
            op = LinearOperator(system.n, emb.conjugate_operator(system.apply))

        def run(b):
            y, rep = gmres(op, emb.scale(b), tol=tol, max_iter=max_iter)
            if not rep.converged:
                raise SolverError(
                    f"GMRES stalled at relative residual {rep.relative_residual:.3e} "
                    f"after {rep.iterations} iterations"
                )
            return emb.unscale(y), rep

        if np.iscomplexobj(rhs):
            x_re, rep_re = run(np.ascontiguousarray(rhs.real))
            if np.max(np.abs(rhs.imag)) > 0:
                x_im, rep_im = run(np.ascontiguousarray(rhs.imag))
            else:
                x_im, rep_im = np.zeros_like(x_re), SolveReport(0, 0.0, True, [0.0])
            sigma = x_re + 1j * x_im
            report = SolveReport(
                max(rep_re.iterations, rep_im.iterations),
                max(rep_re.relative_residual, rep_im.relative_residual),
                rep_re.converged and rep_im.converged,
                rep_re.residual_history,
            )
        else:
            sigma, report = run(np.asarray(rhs, dtype=float))
    else:
        raise ParameterError(f"unknown solver method {method!r}")

    w = system.mesh.flat_weights
    C = (w @ sigma) / system.mesh.L if system.kernel.has_mean_bookkeeping else 0.0
    return ModeSolution(system.mesh, system.kernel, sigma, C, report, system.layers)


class ModeSolution:
    """Density sigma, mean constant C, and evaluators for u and u' on [0, L]."""

    def __init__(self, mesh, kernel, sigma, C, report: SolveReport, layers=None):
        self.mesh = mesh
        self.kernel = kernel
        self.sigma = sigma
        self.C = C
        self.report = report
        self._layers = layers

    @property
    def rho(self):
        """Mean-zero density actually fed to the layer potential."""
        if self.kernel.has_mean_bookkeeping:
            return self.sigma - self.C
        return self.sigma

    def u_at_nodes(self):
        if self._layers is not None:
            return self._layers.s_apply(self.rho) + self.C
        return self.eval_u(self.mesh.flat_nodes)

    def du_at_nodes(self):
        if self._layers is not None:
            return self._layers.d_apply(self.rho)
        return self.eval_du(self.mesh.flat_nodes)

    def eval_u(self, x):
        return self._potential(x, deriv=False) + self.C

    def eval_du(self, x):
        return self._potential(x, deriv=True)

    def _potential(self, x, deriv: bool):
        """Discretized layer potential at arbitrary points: far-field panel sums
        plus a split rule on the host panel (skipped when x sits on a panel
        boundary, where both neighbours are one-sidedly smooth)."""
        mesh, kernel = self.mesh, self.kernel
        rho = self.rho
        scalar = np.ndim(x) == 0
        X = np.mod(np.atleast_1d(np.asarray(x, dtype=float)), mesh.L)
        nodes = mesh.flat_nodes
        w = mesh.flat_weights
        diff = X[:, None] - nodes[None, :]
        K = kernel.deriv(diff, side="+") if deriv else kernel.value(diff)
        out = K @ (w * rho)

        k = mesh.order
        bnd = mesh.boundaries
        for j, xj in enumerate(X):
            if np.min(np.abs(bnd - xj)) == 0.0:
                continue  # boundary targets need no near-field correction
            i = mesh.panel_of(xj)
            sl = slice(i * k, (i + 1) * k)
            pan_nodes = nodes[sl]
            args = xj - pan_nodes
            Kfar = kernel.deriv(args, side="+") if deriv else kernel.value(args)
            far_part = Kfar @ (w[sl] * rho[sl])
            rule = split_rule((bnd[i], bnd[i + 1]), xj, k)
            T = interp_matrix(pan_nodes, rule.nodes)
            vals = T @ rho[sl]
            kr = kernel.deriv(xj - rule.nodes, side="+") if deriv else kernel.value(xj - rule.nodes)
            out[j] += (rule.weights * kr) @ vals - far_part
        return out[0] if scalar else out

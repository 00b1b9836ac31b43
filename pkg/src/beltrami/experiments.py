"""Experiment drivers: ODE kernel comparison, torus convergence, square-toroid
singular convergence, Hodge residuals, order fitting, and CSV/JSON emission.

Runs are deterministic: no randomness anywhere, GMRES starts from zero, and
sweep points are collected in order even when computed concurrently.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .azimuthal import FourierStack, theta_grid
from .errors import HarnessError, ParameterError
from .geometry import circular_torus, unit_square_toroid
from .hodge import harmonic_basis, hodge_decompose, project_residual
from .linalg import dense_solve
from .periodic_ode import PeriodicODEProblem, assemble, solve
from .quadrature import build_mesh, dyadic_refine
from .surface_solver import (
    SurfaceScalarField,
    TangentVectorField,
    mesh_for_curve,
    power_singular_field,
    relative_l2_error,
    restrict_newtonian,
    solve_lb,
    surface_gradient,
)

SQUARE_SINGULAR_EDGE = 2.0  # arclength of the top inner edge of the unit-square toroid


# ---------------------------------------------------------------------------
# records


@dataclass
class ConvergenceRecord:
    """Sorted sweep rows: (sweep value, n_theta, label, error, iterations, seconds)."""

    sweep_name: str
    rows: list = field(default_factory=list)

    def add(self, sweep, ntheta, label, error, iterations, seconds):
        self.rows.append((float(sweep), int(ntheta), str(label), float(error),
                          int(iterations), float(seconds)))
        self.rows.sort(key=lambda r: (r[2], r[0]))

    def filtered(self, label) -> "ConvergenceRecord":
        out = ConvergenceRecord(self.sweep_name)
        out.rows = [r for r in self.rows if r[2] == str(label)]
        return out

    def column(self, idx):
        return np.array([r[idx] for r in self.rows])

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow([self.sweep_name, "ntheta", "label", "error", "iterations", "seconds"])
            for sweep, ntheta, label, error, iterations, seconds in self.rows:
                writer.writerow([repr(sweep), ntheta, label, repr(error), iterations, repr(seconds)])

    def to_json(self, path):
        payload = {
            "sweep": self.sweep_name,
            "rows": [
                dict(zip((self.sweep_name, "ntheta", "label", "error", "iterations", "seconds"), row))
                for row in self.rows
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_csv(cls, path) -> "ConvergenceRecord":
        with open(path, "r", newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rec = cls(header[0])
            for row in reader:
                rec.add(float(row[0]), int(row[1]), row[2], float(row[3]), int(row[4]), float(row[5]))
        return rec


def estimate_order(h, err, plateau: float = 1e-12):
    """Least-squares slope of log(err) vs log(h), ignoring rows at the rounding plateau.

    Returns (slope, stderr).
    """
    h = np.asarray(h, dtype=float)
    err = np.asarray(err, dtype=float)
    keep = err > plateau
    if np.count_nonzero(keep) < 2:
        raise ParameterError("need at least two rows above the plateau to fit an order")
    x = np.log(h[keep])
    y = np.log(err[keep])
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    n = x.size
    if n > 2:
        s2 = float(resid @ resid) / (n - 2)
    else:
        s2 = 0.0
    cov00 = s2 * np.linalg.inv(A.T @ A)[0, 0]
    return float(coef[0]), float(np.sqrt(max(cov00, 0.0)))


# ---------------------------------------------------------------------------
# independent spectral-collocation oracle for periodic ODEs


def fourier_diff_matrices(n: int, L: float):
    """Dense first/second derivative matrices on n equispaced points of [0, L)."""
    if n % 2:
        raise ParameterError("spectral collocation grid size must be even")
    h = 2 * np.pi / n
    d = np.subtract.outer(np.arange(n), np.arange(n))
    safe = np.where(d == 0, 1, d)
    D1 = np.where(d == 0, 0.0, 0.5 * (-1.0) ** d / np.tan(safe * h / 2))
    D2 = np.where(
        d == 0,
        -np.pi**2 / (3 * h**2) - 1.0 / 6.0,
        -((-1.0) ** d) / (2 * np.sin(safe * h / 2) ** 2),
    )
    scale = 2 * np.pi / L
    return D1 * scale, D2 * scale**2


def spectral_periodic_ode_solve(p, q, f, L: float, n: int):
    """Solve u'' + p u' + q u = f by Fourier collocation (dense); q must keep the
    problem uniquely solvable."""
    x = np.arange(n) * (L / n)
    D1, D2 = fourier_diff_matrices(n, L)
    A = D2 + np.diag(p(x)) @ D1 + np.diag(q(x))
    return x, dense_solve(A, f(x))


# ---------------------------------------------------------------------------
# ODE problem catalog


def _smooth_varcoef(kernel):
    L = 2 * np.pi
    return PeriodicODEProblem(
        L=L,
        p=lambda x: np.sin(3 * x) - 2.0,
        q=lambda x: 2 * np.sin(5 * x) - 3.0,
        f=lambda x: np.exp(np.sin(2 * x)) * (4 * np.cos(2 * x) ** 2 - 4 * np.sin(2 * x)),
        kernel=kernel,
    ), None


def _sine_yukawa(kernel):
    L = 2 * np.pi
    return PeriodicODEProblem(
        L=L, p=0.0, q=-1.0,
        f=lambda x: -2.0 * np.sin(x),
        kernel=kernel,
    ), np.sin


def _mean_constrained(kernel):
    L = 2 * np.pi
    return PeriodicODEProblem(
        L=L, p=0.0, q=None, f=np.sin, constraint=(1.0, 0.0), kernel=kernel,
    ), lambda x: -np.sin(x)


ODE_PROBLEMS = {
    "smooth-varcoef": _smooth_varcoef,
    "sine-yukawa": _sine_yukawa,
    "mean-constrained": _mean_constrained,
}


def ode_relative_l2(mesh, u, ref):
    w = mesh.flat_weights
    return float(np.sqrt((w @ np.abs(u - ref) ** 2) / (w @ np.abs(ref) ** 2)))


# ---------------------------------------------------------------------------
# drivers


def run_ode_solve(problem_name: str, n_s: int = 128, kernel: str = "poisson",
                  method: str = "gmres", tol: float = 1e-14, max_iter=None):
    """Solve one catalog ODE; returns (mesh, solution, error-or-None)."""
    if problem_name not in ODE_PROBLEMS:
        raise ParameterError(f"unknown ODE problem {problem_name!r}; "
                             f"choose from {sorted(ODE_PROBLEMS)}")
    if n_s % 16:
        raise ParameterError("n_s must be a multiple of the panel order 16")
    problem, exact = ODE_PROBLEMS[problem_name](kernel)
    mesh = build_mesh(problem.L, n_s // 16)
    sol = solve(assemble(problem, mesh), method=method, tol=tol, max_iter=max_iter)
    err = None
    if exact is not None:
        err = ode_relative_l2(mesh, sol.u_at_nodes(), exact(mesh.flat_nodes))
    return mesh, sol, err


def run_ode_comparison(
    ns_list=(32, 64, 128, 256, 512),
    kernels=("poisson", "yukawa"),
    tol: float = 1e-14,
    reference_factor: int = 8,
    cross_check_tol: float = 1e-10,
    jobs: int = 1,
) -> ConvergenceRecord:
    """Kernel comparison on the smooth variable-coefficient benchmark.

    The reference is a self-solution at reference_factor x the finest grid,
    cross-validated against the spectral collocation oracle; disagreement
    beyond ``cross_check_tol`` flags a solver bug.
    """
    record = ConvergenceRecord("n_s")
    ns_ref = reference_factor * max(ns_list)
    refs = {}
    for kernel in kernels:
        problem, _ = ODE_PROBLEMS["smooth-varcoef"](kernel)
        mesh_ref = build_mesh(problem.L, ns_ref // 16)
        system = assemble(problem, mesh_ref, dense_threshold=ns_ref)
        refs[kernel] = solve(system, method="dense")

    problem, _ = ODE_PROBLEMS["smooth-varcoef"](kernels[0])
    xs, us = spectral_periodic_ode_solve(
        lambda x: np.sin(3 * x) - 2.0,
        lambda x: 2 * np.sin(5 * x) - 3.0,
        lambda x: np.exp(np.sin(2 * x)) * (4 * np.cos(2 * x) ** 2 - 4 * np.sin(2 * x)),
        problem.L,
        1024,
    )
    mismatch = np.max(np.abs(refs[kernels[0]].eval_u(xs) - us)) / np.max(np.abs(us))
    if mismatch > cross_check_tol:
        raise HarnessError(
            f"reference solution disagrees with the spectral oracle by {mismatch:.3e}"
        )

    def task(args):
        kernel, n_s = args
        problem, _ = ODE_PROBLEMS["smooth-varcoef"](kernel)
        mesh = build_mesh(problem.L, n_s // 16)
        t0 = time.perf_counter()
        sol = solve(assemble(problem, mesh), tol=tol)
        seconds = time.perf_counter() - t0
        err = ode_relative_l2(mesh, sol.u_at_nodes(), refs[kernel].eval_u(mesh.flat_nodes))
        return kernel, n_s, err, sol.report.iterations, seconds

    tasks = [(kernel, n_s) for kernel in kernels for n_s in ns_list]
    for kernel, n_s, err, iters, seconds in _run_tasks(task, tasks, jobs):
        record.add(n_s, 0, kernel, err, iters, seconds)
    return record


def run_torus(
    ntheta_list=(4, 8, 16, 32, 64),
    ns_list=(32, 64, 128, 256, 512),
    inner: float = 1.0,
    outer: float = 2.0,
    center=(0.0, 0.5, 0.5),
    kernel: str = "poisson",
    tol: float = 1e-14,
    jobs: int = 1,
) -> ConvergenceRecord:
    """Newtonian-restriction convergence sweep on the circular torus."""
    curve = circular_torus(inner, outer)
    record = ConvergenceRecord("n_s")

    def task(args):
        ntheta, n_s = args
        mesh = build_mesh(curve.L, n_s // 16)
        t0 = time.perf_counter()
        u_exact, f = restrict_newtonian(curve, center, ntheta, mesh)
        sol = solve_lb(curve, mesh, f, kernel=kernel, gmres_tol=tol)
        seconds = time.perf_counter() - t0
        err = relative_l2_error(sol.field, u_exact)
        return ntheta, n_s, err, sol.max_iterations(), seconds

    tasks = [(ntheta, n_s) for ntheta in ntheta_list for n_s in ns_list]
    for ntheta, n_s, err, iters, seconds in _run_tasks(task, tasks, jobs):
        record.add(n_s, ntheta, f"ntheta={ntheta}", err, iters, seconds)
    return record


# --- square toroid --------------------------------------------------------


def square_manufactured_smooth(curve, mesh, n_theta: int, m: int = 3):
    """Closed-form manufactured solution with u'' = sin(m theta) cos(pi s / 2).

    Anti-differentiating twice with mean corrections gives
    u = -(4/pi^2) sin(m theta) cos(pi s/2); f follows from the per-mode ODE
    and jumps at the surface edges while u stays smooth.
    """
    r_data = curve.sample(mesh.flat_nodes)
    r, dr = r_data.r, r_data.dr
    s = mesh.flat_nodes
    U = -(4 / np.pi**2) * np.cos(np.pi * s / 2)
    dU = (2 / np.pi) * np.sin(np.pi * s / 2)
    d2U = np.cos(np.pi * s / 2)
    shape = d2U + (dr / r) * dU - (m**2 / r**2) * U

    sin_m = np.sin(m * theta_grid(n_theta))[:, None]
    u_exact = SurfaceScalarField(curve, mesh, grid=sin_m * U[None, :])
    f = SurfaceScalarField(curve, mesh, grid=sin_m * shape[None, :])
    return u_exact, f


def _resample_lb_field(sol, mesh, n_theta: int) -> SurfaceScalarField:
    """Evaluate an LBSolution's modes at another mesh's nodes."""
    half_modes = {n: mode.eval_u(mesh.flat_nodes) for n, mode in sol.modes.items()}
    stack = FourierStack.from_half_modes(half_modes, n_theta, mesh.n_nodes, mesh=mesh)
    return SurfaceScalarField(sol.curve, mesh, stack=stack)


def run_square_toroid(
    alphas=(-1.0 / 3.0, -0.5, -0.75),
    depths=tuple(range(2, 11)),
    ref_offset: int = 4,
    panels_per_face: int = 1,
    n_theta: int = 10,
    m: int = 3,
    kernel: str = "poisson",
    tol: float = 1e-14,
    include_smooth: bool = True,
    jobs: int = 1,
):
    """Singular-data convergence on the square toroid.

    For each alpha, f = sin(m theta) |s - 2|^alpha is solved on meshes dyadically
    refined into the singular edge; each depth d is self-converged against a
    depth d + ref_offset solve of the same problem.  Returns
    (record, {alpha: (fitted order, stderr)}).
    """
    curve = unit_square_toroid()
    record = ConvergenceRecord("h_final")
    orders = {}
    base_width = 1.0 / panels_per_face

    def solve_depth(alpha, depth):
        mesh = mesh_for_curve(curve, panels_per_face)
        if depth > 0:
            mesh = dyadic_refine(mesh, [SQUARE_SINGULAR_EDGE], depth)
        fld = power_singular_field(alpha, SQUARE_SINGULAR_EDGE, m).realize(curve, mesh, n_theta)
        sol = solve_lb(curve, mesh, fld, kernel=kernel, gmres_tol=tol)
        return mesh, sol

    for alpha in alphas:
        label = f"alpha={alpha:g}"
        needed = sorted(set(depths) | {d + ref_offset for d in depths})

        def one(depth, _alpha=alpha):
            t0 = time.perf_counter()
            mesh, sol = solve_depth(_alpha, depth)
            return depth, mesh, sol, time.perf_counter() - t0

        solved = dict()
        for depth, mesh, sol, seconds in _run_tasks(lambda d: one(d), needed, jobs):
            solved[depth] = (mesh, sol, seconds)

        hs, errs = [], []
        for d in depths:
            mesh_d, sol_d, seconds = solved[d]
            _, sol_ref, _ = solved[d + ref_offset]
            ref_field = _resample_lb_field(sol_ref, mesh_d, n_theta)
            err = relative_l2_error(sol_d.field, ref_field)
            h_final = base_width * 0.5**d
            record.add(h_final, n_theta, label, err, sol_d.max_iterations(), seconds)
            hs.append(h_final)
            errs.append(err)
        orders[alpha] = estimate_order(hs, errs)

    if include_smooth:
        # anti-derivative-constructed smooth solution: exact reference, 1 panel/face
        mesh = mesh_for_curve(curve, 1)
        t0 = time.perf_counter()
        u_exact, f = square_manufactured_smooth(curve, mesh, n_theta, m)
        sol = solve_lb(curve, mesh, f, kernel=kernel, gmres_tol=tol)
        record.add(1.0, n_theta, "smooth-manufactured",
                   relative_l2_error(sol.field, u_exact),
                   sol.max_iterations(), time.perf_counter() - t0)

        # direct f = sin(m theta) cos(pi s/2): self-convergence, 2 panels/face
        def solve_direct(ppf):
            mesh = mesh_for_curve(curve, ppf)
            fld = SurfaceScalarField.from_function(
                curve, mesh, n_theta, lambda th, s: np.sin(m * th) * np.cos(np.pi * s / 2))
            return mesh, solve_lb(curve, mesh, fld, kernel=kernel, gmres_tol=tol)

        t0 = time.perf_counter()
        mesh2, sol2 = solve_direct(2)
        _, sol_ref = solve_direct(8)
        ref_field = _resample_lb_field(sol_ref, mesh2, n_theta)
        record.add(0.5, n_theta, "smooth-direct",
                   relative_l2_error(sol2.field, ref_field),
                   sol2.max_iterations(), time.perf_counter() - t0)

    return record, orders


HODGE_FIELDS = ("basis-1", "basis-2", "mixed-power", "gradient-of")


def run_hodge(
    field_name: str = "mixed-power",
    panels_per_face: int = 2,
    n_theta: int = 16,
    kernel: str = "poisson",
    tol: float = 1e-14,
    diff_method: str = "legendre",
):
    """Hodge-decompose a catalog field on the square toroid and report the
    relative residual after projecting the harmonic part onto the basis."""
    curve = unit_square_toroid()
    mesh = mesh_for_curve(curve, panels_per_face)
    basis = harmonic_basis(curve, mesh, n_theta)

    if field_name == "basis-1":
        F = basis[0]
    elif field_name == "basis-2":
        F = basis[1]
    elif field_name == "mixed-power":
        # F = r s_hat + r^-2 theta_hat
        r = curve.sample(mesh.flat_nodes).r
        shape = (n_theta, mesh.n_nodes)
        F = TangentVectorField(
            SurfaceScalarField(curve, mesh, grid=np.broadcast_to(r, shape).copy()),
            SurfaceScalarField(curve, mesh, grid=np.broadcast_to(r**-2.0, shape).copy()),
        )
    elif field_name == "gradient-of":
        fld = SurfaceScalarField.from_function(
            curve, mesh, n_theta, lambda th, s: np.sin(3 * th) * np.cos(np.pi * s / 2))
        phi = solve_lb(curve, mesh, fld, kernel=kernel, gmres_tol=tol)
        F = surface_gradient(phi)
    else:
        raise ParameterError(f"unknown hodge field {field_name!r}; choose from {HODGE_FIELDS}")

    t0 = time.perf_counter()
    dec = hodge_decompose(F, method=diff_method, kernel=kernel, gmres_tol=tol)
    residual = project_residual(dec.harmonic, basis, F.norm())
    seconds = time.perf_counter() - t0
    return {
        "field": field_name,
        "residual": residual,
        "field_norm": F.norm(),
        "grad_alpha_norm": dec.grad_alpha.norm(),
        "rot_grad_beta_norm": dec.rot_grad_beta.norm(),
        "harmonic_norm": dec.harmonic.norm(),
        "iterations": max(dec.alpha.max_iterations(), dec.beta.max_iterations()),
        "seconds": seconds,
    }


def _run_tasks(fn, tasks, jobs):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]

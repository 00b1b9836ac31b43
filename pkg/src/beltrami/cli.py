"""Command-line harness.

Subcommands: ode-solve, ode-compare, lb-solve, converge {torus, square-toroid},
hodge.  Results go to stdout; --out writes CSV (plus a JSON twin) with full
double precision.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import experiments
from .config import ExperimentConfig, load_config
from .errors import BeltramiError
from .kernels import KERNEL_TAGS
from .surface_solver import relative_l2_error, restrict_newtonian, solve_lb


def _add_common(parser):
    parser.add_argument("--config", help="INI experiment config; flags override it")
    parser.add_argument("--kernel", choices=KERNEL_TAGS, help="periodic Green's function")
    parser.add_argument("--order", type=int, help="Gauss-Legendre nodes per panel")
    parser.add_argument("--panels", type=int, help="panels per smooth segment")
    parser.add_argument("--refine-depth", type=int, help="dyadic refinement depth")
    parser.add_argument("--ntheta", type=int, help="azimuthal grid size")
    parser.add_argument("--solver", choices=("gmres", "dense"), help="linear solver")
    parser.add_argument("--gmres-tol", type=float, help="relative GMRES tolerance")
    parser.add_argument("--gmres-maxit", type=int, help="GMRES iteration cap (0 = system size)")
    parser.add_argument("--jobs", type=int, help="concurrent sweep points")
    parser.add_argument("--out", help="CSV output path (JSON twin written alongside)")


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {
        "kernel": args.kernel,
        "order": args.order,
        "panels": args.panels,
        "refine_depth": args.refine_depth,
        "ntheta": args.ntheta,
        "method": args.solver,
        "gmres_tol": args.gmres_tol,
        "gmres_maxit": args.gmres_maxit,
        "jobs": args.jobs,
        "path": args.out,
    }
    for name, value in overrides.items():
        if value is not None:
            setattr(cfg, name, value)
    return cfg


def _emit(record, cfg):
    if cfg.path:
        record.to_csv(cfg.path)
        record.to_json(cfg.path.rsplit(".", 1)[0] + ".json")
        print(f"wrote {cfg.path}")


def cmd_ode_solve(args):
    cfg = _load(args)
    mesh, sol, err = experiments.run_ode_solve(
        args.problem, n_s=args.ns, kernel=cfg.kernel,
        method=cfg.method, tol=cfg.gmres_tol, max_iter=cfg.max_iter,
    )
    print(f"problem={args.problem} kernel={cfg.kernel} N_s={mesh.n_nodes} "
          f"iterations={sol.report.iterations} residual={sol.report.relative_residual:.3e}")
    if err is not None:
        print(f"relative L2 error vs exact solution: {err:.6e}")
    if cfg.path:
        import csv

        with open(cfg.path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["s", "sigma", "u", "du"])
            u = sol.u_at_nodes()
            du = sol.du_at_nodes()
            for row in zip(mesh.flat_nodes, np.real(sol.sigma), np.real(u), np.real(du)):
                writer.writerow([repr(float(v)) for v in row])
        print(f"wrote {cfg.path}")
    return 0


def cmd_ode_compare(args):
    cfg = _load(args)
    ns_list = _int_list(args.ns_list)
    record = experiments.run_ode_comparison(ns_list=ns_list, tol=cfg.gmres_tol, jobs=cfg.jobs)
    _print_record(record)
    _emit(record, cfg)
    return 0


def cmd_lb_solve(args):
    cfg = _load(args)
    if args.geometry:
        cfg.geometry_name = args.geometry
    if args.inner is not None:
        cfg.inner = args.inner
    if args.outer is not None:
        cfg.outer = args.outer
    if args.vertices:
        from .config import _parse_vertices

        cfg.vertices = _parse_vertices(args.vertices)
    if args.rhs:
        cfg.rhs_name = args.rhs
    if args.alpha is not None:
        cfg.alpha = args.alpha
    curve = cfg.build_curve()
    mesh = cfg.build_mesh(curve)
    if cfg.rhs_name == "newtonian":
        u_exact, f = restrict_newtonian(curve, cfg.center, cfg.ntheta, mesh)
    elif cfg.rhs_name == "power":
        from .surface_solver import power_singular_field

        f = power_singular_field(cfg.alpha, cfg.s0, cfg.m).realize(curve, mesh, cfg.ntheta)
        u_exact = None
    elif cfg.rhs_name == "cosine-direct":
        from .surface_solver import SurfaceScalarField

        f = SurfaceScalarField.from_function(
            curve, mesh, cfg.ntheta,
            lambda th, s: np.sin(cfg.m * th) * np.cos(np.pi * s / 2))
        u_exact = None
    elif cfg.rhs_name == "cosine-manufactured":
        u_exact, f = experiments.square_manufactured_smooth(curve, mesh, cfg.ntheta, cfg.m)
    else:
        raise BeltramiError(f"unknown rhs {cfg.rhs_name!r}")

    sol = solve_lb(curve, mesh, f, kernel=cfg.kernel, method=cfg.method,
                   gmres_tol=cfg.gmres_tol, max_iter=cfg.max_iter)
    print(f"geometry={cfg.geometry_name} rhs={cfg.rhs_name} ntheta={cfg.ntheta} "
          f"N_s={mesh.n_nodes} modes={sorted(sol.modes)} max_iterations={sol.max_iterations()}")
    print(f"surface mean of u: {sol.surface_mean():.3e}")
    if u_exact is not None:
        print(f"relative L2 error vs exact solution: {relative_l2_error(sol.field, u_exact):.6e}")
    if cfg.path:
        import csv

        with open(cfg.path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta_index", "s", "u"])
            for i in range(sol.field.grid.shape[0]):
                for s, u in zip(mesh.flat_nodes, sol.field.grid[i]):
                    writer.writerow([i, repr(float(s)), repr(float(u))])
        print(f"wrote {cfg.path}")
    return 0


def cmd_converge(args):
    cfg = _load(args)
    if args.what == "torus":
        record = experiments.run_torus(
            ntheta_list=_int_list(args.ntheta_list),
            ns_list=_int_list(args.ns_list),
            kernel=cfg.kernel, tol=cfg.gmres_tol, jobs=cfg.jobs,
        )
        _print_record(record)
    else:
        alphas = _float_list(args.alpha_list) if args.alpha_list else (
            (args.alpha,) if args.alpha is not None else (-1.0 / 3.0, -0.5, -0.75))
        depths = tuple(range(args.depth_min, args.depth_max + 1))
        record, orders = experiments.run_square_toroid(
            alphas=alphas, depths=depths,
            panels_per_face=cfg.panels, n_theta=cfg.ntheta, m=cfg.m,
            kernel=cfg.kernel, tol=cfg.gmres_tol, jobs=cfg.jobs,
        )
        _print_record(record)
        for alpha, (slope, stderr) in sorted(orders.items()):
            print(f"alpha={alpha:+.4f}: fitted order {slope:.4f} +- {stderr:.4f} "
                  f"(theory {1 + alpha:.4f})")
    _emit(record, cfg)
    return 0


def cmd_hodge(args):
    cfg = _load(args)
    report = experiments.run_hodge(
        field_name=args.field,
        panels_per_face=cfg.panels if cfg.panels > 1 else 2,
        n_theta=cfg.ntheta if cfg.ntheta != 10 else 16,
        kernel=cfg.kernel, tol=cfg.gmres_tol, diff_method=args.diff_method,
    )
    for key, value in report.items():
        if isinstance(value, float):
            print(f"{key}: {value:.6e}")
        else:
            print(f"{key}: {value}")
    return 0


def _print_record(record):
    print(f"{record.sweep_name:>12} {'ntheta':>7} {'label':>20} {'error':>13} "
          f"{'iters':>6} {'seconds':>9}")
    for sweep, ntheta, label, error, iters, seconds in record.rows:
        print(f"{sweep:12.6g} {ntheta:7d} {label:>20} {error:13.6e} {iters:6d} {seconds:9.3f}")


def _int_list(text):
    return tuple(int(tok) for tok in text.split(","))


def _float_list(text):
    return tuple(float(tok) for tok in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beltrami",
        description="High-order Laplace-Beltrami solver on piecewise-smooth "
                    "surfaces of revolution",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ode-solve", help="solve one catalog periodic ODE")
    p.add_argument("--problem", default="smooth-varcoef",
                   choices=sorted(experiments.ODE_PROBLEMS))
    p.add_argument("--ns", type=int, default=128, help="total nodes (multiple of 16)")
    _add_common(p)
    p.set_defaults(func=cmd_ode_solve)

    p = sub.add_parser("ode-compare", help="kernel comparison sweep on the smooth benchmark")
    p.add_argument("--ns-list", default="32,64,128,256,512")
    _add_common(p)
    p.set_defaults(func=cmd_ode_compare)

    p = sub.add_parser("lb-solve", help="solve one Laplace-Beltrami problem")
    p.add_argument("--geometry", dest="geometry", choices=("circular-torus", "polygon-toroid"))
    p.add_argument("--inner", type=float)
    p.add_argument("--outer", type=float)
    p.add_argument("--vertices", help="r1,z1; r2,z2; ...")
    p.add_argument("--rhs", choices=("newtonian", "power", "cosine-direct", "cosine-manufactured"))
    p.add_argument("--alpha", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_lb_solve)

    p = sub.add_parser("converge", help="convergence studies")
    p.add_argument("what", choices=("torus", "square-toroid"))
    p.add_argument("--ntheta-list", default="4,8,16,32,64")
    p.add_argument("--ns-list", default="32,64,128,256,512")
    p.add_argument("--alpha", type=float)
    p.add_argument("--alpha-list")
    p.add_argument("--depth-min", type=int, default=2)
    p.add_argument("--depth-max", type=int, default=10)
    _add_common(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("hodge", help="Hodge decomposition residual test")
    p.add_argument("--field", default="mixed-power", choices=experiments.HODGE_FIELDS)
    p.add_argument("--diff-method", default="legendre", choices=("legendre", "chebyshev"))
    _add_common(p)
    p.set_defaults(func=cmd_hodge)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BeltramiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

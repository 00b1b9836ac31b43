"""Experiment configuration: flat sectioned key=value files (INI grammar).

Sections and keys:

    [geometry]       name (circular-torus | polygon-toroid), inner, outer, vertices
    [discretization] order, panels, ntheta, refine-targets, refine-depth, refine-side
    [rhs]            name (newtonian | power | cosine-direct | cosine-manufactured),
                     center, alpha, s0, m
    [solver]         kernel, method, gmres-tol, gmres-maxit, jobs
    [output]         path

Unknown sections or keys are rejected; parse -> write -> parse is lossless.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass

from .errors import ConfigError
from .geometry import GeneratingCurve, curve_from_catalog
from .quadrature import PanelMesh, build_mesh, dyadic_refine

_ALLOWED = {
    "geometry": {"name", "inner", "outer", "vertices"},
    "discretization": {"order", "panels", "ntheta", "refine-targets", "refine-depth", "refine-side"},
    "rhs": {"name", "center", "alpha", "s0", "m"},
    "solver": {"kernel", "method", "gmres-tol", "gmres-maxit", "jobs"},
    "output": {"path"},
}


@dataclass
class ExperimentConfig:
    geometry_name: str = "circular-torus"
    inner: float = 1.0
    outer: float = 2.0
    vertices: tuple = ()
    order: int = 16
    panels: int = 1
    ntheta: int = 10
    refine_targets: tuple = ()
    refine_depth: int = 0
    refine_side: str = "both"
    rhs_name: str = "newtonian"
    center: tuple = (0.0, 0.5, 0.5)
    alpha: float = -0.5
    s0: float = 2.0
    m: int = 3
    kernel: str = "poisson"
    method: str = "gmres"
    gmres_tol: float = 1e-14
    gmres_maxit: int = 0  # 0 means "dimension of the system"
    jobs: int = 1
    path: str = ""

    def build_curve(self) -> GeneratingCurve:
        if self.geometry_name == "circular-torus":
            return curve_from_catalog("circular-torus", {"inner": self.inner, "outer": self.outer})
        if self.geometry_name == "polygon-toroid":
            if not self.vertices:
                raise ConfigError("polygon-toroid needs a vertices list")
            return curve_from_catalog("polygon-toroid", {"vertices": list(self.vertices)})
        raise ConfigError(f"unknown geometry {self.geometry_name!r}")

    def build_mesh(self, curve: GeneratingCurve) -> PanelMesh:
        mesh = build_mesh(curve.L, self.panels, curve.breakpoints, order=self.order)
        if self.refine_depth > 0 and self.refine_targets:
            mesh = dyadic_refine(mesh, self.refine_targets, self.refine_depth, side=self.refine_side)
        return mesh

    @property
    def max_iter(self):
        return None if self.gmres_maxit == 0 else self.gmres_maxit

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp["geometry"] = {"name": self.geometry_name}
        if self.geometry_name == "circular-torus":
            cp["geometry"]["inner"] = repr(self.inner)
            cp["geometry"]["outer"] = repr(self.outer)
        else:
            cp["geometry"]["vertices"] = "; ".join(f"{r!r},{z!r}" for r, z in self.vertices)
        cp["discretization"] = {
            "order": str(self.order),
            "panels": str(self.panels),
            "ntheta": str(self.ntheta),
            "refine-targets": ",".join(repr(t) for t in self.refine_targets),
            "refine-depth": str(self.refine_depth),
            "refine-side": self.refine_side,
        }
        cp["rhs"] = {"name": self.rhs_name}
        if self.rhs_name == "newtonian":
            cp["rhs"]["center"] = ",".join(repr(c) for c in self.center)
        elif self.rhs_name == "power":
            cp["rhs"].update({"alpha": repr(self.alpha), "s0": repr(self.s0), "m": str(self.m)})
        elif self.rhs_name in ("cosine-direct", "cosine-manufactured"):
            cp["rhs"]["m"] = str(self.m)
        cp["solver"] = {
            "kernel": self.kernel,
            "method": self.method,
            "gmres-tol": repr(self.gmres_tol),
            "gmres-maxit": str(self.gmres_maxit),
            "jobs": str(self.jobs),
        }
        cp["output"] = {"path": self.path}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    for section in cp.sections():
        if section not in _ALLOWED:
            raise ConfigError(f"unknown section [{section}]")
        for key in cp[section]:
            if key not in _ALLOWED[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")

    cfg = ExperimentConfig()

    def get(section, key, cast, current):
        if cp.has_option(section, key):
            raw = cp.get(section, key)
            try:
                return cast(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from exc
        return current

    cfg.geometry_name = get("geometry", "name", str, cfg.geometry_name)
    cfg.inner = get("geometry", "inner", float, cfg.inner)
    cfg.outer = get("geometry", "outer", float, cfg.outer)
    cfg.vertices = get("geometry", "vertices", _parse_vertices, cfg.vertices)

    cfg.order = get("discretization", "order", int, cfg.order)
    cfg.panels = get("discretization", "panels", int, cfg.panels)
    cfg.ntheta = get("discretization", "ntheta", int, cfg.ntheta)
    cfg.refine_targets = get("discretization", "refine-targets", _parse_floats, cfg.refine_targets)
    cfg.refine_depth = get("discretization", "refine-depth", int, cfg.refine_depth)
    cfg.refine_side = get("discretization", "refine-side", str, cfg.refine_side)

    cfg.rhs_name = get("rhs", "name", str, cfg.rhs_name)
    cfg.center = get("rhs", "center", _parse_floats, cfg.center)
    cfg.alpha = get("rhs", "alpha", float, cfg.alpha)
    cfg.s0 = get("rhs", "s0", float, cfg.s0)
    cfg.m = get("rhs", "m", int, cfg.m)

    cfg.kernel = get("solver", "kernel", str, cfg.kernel)
    cfg.method = get("solver", "method", str, cfg.method)
    cfg.gmres_tol = get("solver", "gmres-tol", float, cfg.gmres_tol)
    cfg.gmres_maxit = get("solver", "gmres-maxit", int, cfg.gmres_maxit)
    cfg.jobs = get("solver", "jobs", int, cfg.jobs)
    cfg.path = get("output", "path", str, cfg.path)
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _parse_floats(raw: str) -> tuple:
    raw = raw.strip()
    if not raw:
        return ()
    return tuple(float(tok) for tok in raw.split(","))


def _parse_vertices(raw: str) -> tuple:
    pairs = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        r, z = chunk.split(",")
        pairs.append((float(r), float(z)))
    return tuple(pairs)

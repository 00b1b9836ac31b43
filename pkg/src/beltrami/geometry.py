"""Arclength-parameterized generating curves of surfaces of revolution.

A curve is a list of smooth segments (r(s), z(s)) with |(r', z')| = 1,
breakpoints at the surface edges, and r > 0 everywhere (the surface stays
separated from the rotation axis).  Catalog: circular torus and piecewise
linear (polygon) toroids, which cover every supported experiment with exact
derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AxisSeparationError,
    GeometryError,
    NonSmoothPointError,
    ParameterError,
)

_TOL = 1e-12


@dataclass(frozen=True)
class CurvePoint:
    """Position and s-derivatives of the generating curve at one arclength."""

    r: float
    z: float
    dr: float
    dz: float
    d2r: float
    d2z: float


@dataclass
class CurveSamples:
    """Vectorized curve data at an array of arclengths."""

    r: np.ndarray
    z: np.ndarray
    dr: np.ndarray
    dz: np.ndarray
    d2r: np.ndarray
    d2z: np.ndarray


class _LineSegment:
    def __init__(self, s0, s1, p0, p1):
        self.s0, self.s1 = float(s0), float(s1)
        self.p0 = np.asarray(p0, dtype=float)
        d = np.asarray(p1, dtype=float) - self.p0
        length = np.hypot(*d)
        if length <= 0:
            raise GeometryError("zero-length polygon edge")
        self.dir = d / length

    def sample(self, s):
        t = s - self.s0
        zero = np.zeros_like(t)
        return CurveSamples(
            r=self.p0[0] + self.dir[0] * t,
            z=self.p0[1] + self.dir[1] * t,
            dr=np.full_like(t, self.dir[0]),
            dz=np.full_like(t, self.dir[1]),
            d2r=zero,
            d2z=zero.copy(),
        )


class _ArcSegment:
    """Circle of radius a about (cr, cz), traversed counterclockwise from phase phi0."""

    def __init__(self, s0, s1, center, radius, phi0=0.0):
        self.s0, self.s1 = float(s0), float(s1)
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.phi0 = float(phi0)

    def sample(self, s):
        phi = self.phi0 + (s - self.s0) / self.radius
        c, a = self.center, self.radius
        return CurveSamples(
            r=c[0] + a * np.cos(phi),
            z=c[1] + a * np.sin(phi),
            dr=-np.sin(phi),
            dz=np.cos(phi),
            d2r=-np.cos(phi) / a,
            d2z=-np.sin(phi) / a,
        )


class GeneratingCurve:
    """Closed piecewise-smooth generating curve; immutable and safe to share."""

    def __init__(self, segments, breakpoints, total_length):
        self.segments = tuple(segments)
        self.breakpoints = np.asarray(sorted(breakpoints), dtype=float)
        self.total_length = float(total_length)
        self.closed = True
        self._starts = np.array([seg.s0 for seg in self.segments])
        self._validate()

    @property
    def L(self) -> float:
        return self.total_length

    def _validate(self):
        if self.breakpoints.size and (
            self.breakpoints[0] < 0 or self.breakpoints[-1] >= self.total_length
        ):
            raise GeometryError("breakpoints must lie in [0, L)")
        s = np.linspace(0, self.total_length, 257)[:-1] + 1e-6
        data = self.sample(np.mod(s, self.total_length))
        if np.min(data.r) <= 0:
            raise AxisSeparationError("curve touches the rotation axis (r <= 0)")
        speed = data.dr**2 + data.dz**2
        if np.max(np.abs(speed - 1.0)) > _TOL:
            raise GeometryError("curve is not arclength-parameterized")
        first = self.sample(np.array([0.0]), side="+")
        last = self.segments[-1].sample(np.array([self.total_length]))
        if abs(first.r[0] - last.r[0]) > _TOL or abs(first.z[0] - last.z[0]) > _TOL:
            raise GeometryError("curve is not closed")

    def _segment_index(self, s, side=None):
        idx = np.searchsorted(self._starts, s, side="right") - 1
        idx = np.clip(idx, 0, len(self.segments) - 1)
        if side in ("-", "left"):
            # points exactly at a segment start belong to the previous segment
            at_start = s == self._starts[idx]
            idx = np.where(at_start, (idx - 1) % len(self.segments), idx)
        return idx

    def sample(self, s, side=None) -> CurveSamples:
        """Curve data at arclengths ``s`` (wrapped periodically).

        Evaluation exactly at a breakpoint needs ``side`` ("+"/"-") to pick the
        one-sided limit; interior points ignore the flag.
        """
        s = np.atleast_1d(np.asarray(s, dtype=float))
        wrapped = np.mod(s, self.total_length)
        if side is None and self.breakpoints.size:
            hits = np.isin(wrapped, self.breakpoints)
            if np.any(hits):
                raise NonSmoothPointError(
                    "evaluation at a breakpoint requires a side flag ('+' or '-')"
                )
        idx = self._segment_index(wrapped, side=side)
        # a left-sided limit at s = 0 wraps to the final segment at s = L
        if side in ("-", "left"):
            wrapped = np.where((wrapped == 0.0) & (idx == len(self.segments) - 1),
                               self.total_length, wrapped)
        out = CurveSamples(*(np.empty_like(wrapped) for _ in range(6)))
        for i, seg in enumerate(self.segments):
            mask = idx == i
            if not np.any(mask):
                continue
            vals = seg.sample(wrapped[mask])
            for name in ("r", "z", "dr", "dz", "d2r", "d2z"):
                getattr(out, name)[mask] = getattr(vals, name)
        return out

    def eval_point(self, s: float, side=None) -> CurvePoint:
        """Point data at a single arclength; see ``sample`` for the side flag."""
        vals = self.sample(np.array([float(s)]), side=side)
        return CurvePoint(*(float(getattr(vals, name)[0])
                            for name in ("r", "z", "dr", "dz", "d2r", "d2z")))

    def mean_curvature(self, s):
        """H = (kappa_profile + kappa_azimuthal) / 2 at smooth points.

        kappa_profile = r' z'' - z' r'' and kappa_azimuthal = z' / r, paired
        with the normal (z' cos, z' sin, -r'); the sign convention is validated
        by the harmonic-restriction cross-check (a sphere traversed so that the
        normal is outward gives H = 1/radius).
        """
        scalar = np.ndim(s) == 0
        s = np.atleast_1d(np.asarray(s, dtype=float))
        wrapped = np.mod(s, self.total_length)
        if self.breakpoints.size and np.any(np.isin(wrapped, self.breakpoints)):
            raise NonSmoothPointError("mean curvature is undefined at a surface edge")
        d = self.sample(wrapped)
        kappa_profile = d.dr * d.d2z - d.dz * d.d2r
        kappa_azimuthal = d.dz / d.r
        H = 0.5 * (kappa_profile + kappa_azimuthal)
        return float(H[0]) if scalar else H


def circular_torus(inner: float, outer: float) -> GeneratingCurve:
    """Torus generated by the circle of center ((inner+outer)/2, 0) and radius (outer-inner)/2.

    s = 0 sits at the outermost point (r = outer, z = 0), traversed
    counterclockwise in the (r, z) plane.
    """
    if inner <= 0:
        raise AxisSeparationError("inner radius must be positive")
    if not inner < outer:
        raise ParameterError("need 0 < inner < outer")
    radius = (outer - inner) / 2
    center = ((inner + outer) / 2, 0.0)
    L = 2 * np.pi * radius
    seg = _ArcSegment(0.0, L, center, radius, phi0=0.0)
    return GeneratingCurve([seg], breakpoints=[], total_length=L)


def polygon_toroid(vertices) -> GeneratingCurve:
    """Closed piecewise-linear generating curve through ``vertices`` (in order).

    Every vertex is a breakpoint.  Vertices must keep r > 0 and the polygon
    must be simple.
    """
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
        raise ParameterError("polygon needs at least three (r, z) vertices")
    if np.any(verts[:, 0] <= 0):
        raise AxisSeparationError("all polygon vertices must have r > 0")
    _check_simple(verts)
    lengths = np.hypot(*(np.roll(verts, -1, axis=0) - verts).T)
    if np.any(lengths <= 0):
        raise GeometryError("repeated consecutive vertices")
    starts = np.concatenate([[0.0], np.cumsum(lengths)])
    segments = [
        _LineSegment(starts[i], starts[i + 1], verts[i], verts[(i + 1) % len(verts)])
        for i in range(len(verts))
    ]
    return GeneratingCurve(segments, breakpoints=starts[:-1], total_length=starts[-1])


def unit_square_toroid() -> GeneratingCurve:
    """Square toroid of the experiments: unit square with vertices
    (2,0), (1,0), (1,1), (2,1); L = 4 and s = 2 is the top inner edge."""
    return polygon_toroid([(2.0, 0.0), (1.0, 0.0), (1.0, 1.0), (2.0, 1.0)])


_CATALOG = ("circular-torus", "polygon-toroid")


def curve_from_catalog(name: str, params: dict) -> GeneratingCurve:
    """Build a catalog curve; see the CLI config grammar for parameter keys."""
    if name == "circular-torus":
        return circular_torus(float(params["inner"]), float(params["outer"]))
    if name == "polygon-toroid":
        return polygon_toroid(params["vertices"])
    raise ParameterError(f"unknown catalog curve {name!r}; expected one of {_CATALOG}")


def _check_simple(verts):
    n = len(verts)

    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    def intersects(p1, p2, p3, p4):
        d1, d2 = orient(p3, p4, p1), orient(p3, p4, p2)
        d3, d4 = orient(p1, p2, p3), orient(p1, p2, p4)
        if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
            return True
        return False

    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # shared endpoints of adjacent edges are allowed
            if intersects(verts[i], verts[(i + 1) % n], verts[j], verts[(j + 1) % n]):
                raise GeometryError("self-intersecting polygon")

"""Panel meshes on [0, L]: Gauss-Legendre rules, dyadic edge refinement,
barycentric Lagrange interpolation, and the near-field panel split."""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSplitError,
    ExtrapolationError,
    MeshError,
    ParameterError,
    RefinementError,
)

MAX_ORDER = 64
_BOUNDARY_TOL = 1e-12


@functools.lru_cache(maxsize=None)
def _gauss_cached(k: int):
    x, w = np.polynomial.legendre.leggauss(k)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(k: int):
    """Nodes and weights of the k-point Gauss-Legendre rule on [-1, 1]."""
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= MAX_ORDER:
        raise ParameterError(f"node count must be an integer in [1, {MAX_ORDER}], got {k!r}")
    x, w = _gauss_cached(int(k))
    return x.copy(), w.copy()


def mapped_rule(a: float, b: float, k: int):
    """Gauss-Legendre rule mapped to [a, b]."""
    x, w = _gauss_cached(int(k))
    half = (b - a) / 2
    return (a + b) / 2 + half * x, half * w


def bary_weights(nodes):
    """Barycentric weights for the given interpolation nodes (normalized)."""
    nodes = np.asarray(nodes, dtype=float)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    w = 1.0 / np.prod(diff, axis=1)
    return w / np.max(np.abs(w))


def interp_matrix(nodes, targets, weights=None):
    """Matrix T with T[i, j] = l_j(targets[i]) for the Lagrange basis on ``nodes``.

    Second barycentric form; exact when a target coincides with a node.
    """
    nodes = np.asarray(nodes, dtype=float)
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    if weights is None:
        weights = bary_weights(nodes)
    d = targets[:, None] - nodes[None, :]
    hit_rows, hit_cols = np.nonzero(d == 0.0)
    d[hit_rows, :] = 1.0  # keep the division well-defined; rows rewritten below
    T = weights[None, :] / d
    sums = np.sum(T, axis=1, keepdims=True)
    sums[hit_rows] = 1.0
    T /= sums
    T[hit_rows, :] = 0.0
    T[hit_rows, hit_cols] = 1.0
    return T


def lagrange_interp(nodes, values, x, panel=None):
    """Evaluate the Lagrange interpolant of (nodes, values) at ``x`` inside the panel.

    ``panel`` is the host interval (defaults to the node hull); points outside
    it are refused rather than extrapolated.
    """
    nodes = np.asarray(nodes, dtype=float)
    if panel is None:
        a, b = nodes.min(), nodes.max()
    else:
        a, b = panel
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    pad = _BOUNDARY_TOL * max(1.0, abs(a), abs(b))
    if np.any(xs < a - pad) or np.any(xs > b + pad):
        raise ExtrapolationError(f"point outside panel [{a}, {b}]")
    out = interp_matrix(nodes, xs) @ np.asarray(values)
    return out[0] if np.ndim(x) == 0 else out


def diff_matrix(nodes):
    """First-derivative matrix of the Lagrange interpolant on ``nodes`` (barycentric form)."""
    nodes = np.asarray(nodes, dtype=float)
    w = bary_weights(nodes)
    dx = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(dx, 1.0)
    D = (w[None, :] / w[:, None]) / dx
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -np.sum(D, axis=1))  # negative sum trick
    return D


class PanelMesh:
    """Ordered partition of [0, L] into panels, each carrying a k-point Gauss rule.

    Immutable after construction.  ``parent`` records refinement ancestry.
    """

    def __init__(self, boundaries, order: int = 16, parent: "PanelMesh | None" = None):
        boundaries = np.asarray(boundaries, dtype=float)
        if boundaries.ndim != 1 or boundaries.size < 2:
            raise MeshError("mesh needs at least one panel")
        if boundaries[0] != 0.0:
            raise MeshError("mesh must start at 0")
        if np.any(np.diff(boundaries) <= 0):
            raise MeshError("panel boundaries must be strictly increasing")
        if not isinstance(order, (int, np.integer)) or not 1 <= order <= MAX_ORDER:
            raise ParameterError(f"panel order must be in [1, {MAX_ORDER}], got {order!r}")
        self.boundaries = boundaries
        self.order = int(order)
        self.parent = parent

        ref_x, ref_w = _gauss_cached(self.order)
        a = boundaries[:-1][:, None]
        b = boundaries[1:][:, None]
        half = (b - a) / 2
        self.nodes = (a + b) / 2 + half * ref_x[None, :]
        self.weights = half * ref_w[None, :]
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def L(self) -> float:
        return float(self.boundaries[-1])

    @property
    def n_panels(self) -> int:
        return self.boundaries.size - 1

    @property
    def n_nodes(self) -> int:
        return self.n_panels * self.order

    @property
    def panels(self):
        return np.column_stack([self.boundaries[:-1], self.boundaries[1:]])

    @property
    def flat_nodes(self):
        return self.nodes.reshape(-1)

    @property
    def flat_weights(self):
        return self.weights.reshape(-1)

    def panel_of(self, x: float) -> int:
        """Index of the panel containing x (interior points only)."""
        i = int(np.searchsorted(self.boundaries, x, side="right")) - 1
        return min(max(i, 0), self.n_panels - 1)

    def is_boundary(self, s: float) -> bool:
        return bool(np.min(np.abs(self.boundaries - s)) <= _BOUNDARY_TOL * max(1.0, self.L))

    def require_boundaries(self, points):
        missing = [float(s) for s in np.atleast_1d(points) if not self.is_boundary(s)]
        if missing:
            raise MeshError(f"points {missing} must coincide with panel boundaries")

    def __repr__(self):
        return f"PanelMesh(M={self.n_panels}, k={self.order}, L={self.L:g})"


def build_mesh(L: float, panels_per_segment: int, breakpoints=(), order: int = 16) -> PanelMesh:
    """Uniform panels on each inter-breakpoint segment of [0, L].

    Breakpoints (surface edges, coefficient discontinuities) always land on
    panel boundaries.
    """
    if not L > 0:
        raise ParameterError("domain length must be positive")
    if not isinstance(panels_per_segment, (int, np.integer)) or panels_per_segment < 1:
        raise ParameterError("panels_per_segment must be a positive integer")
    bps = np.unique(np.asarray(breakpoints, dtype=float))
    if bps.size and (bps[0] < 0 or bps[-1] >= L):
        raise ParameterError(f"breakpoints must lie in [0, {L}), got {bps}")
    edges = np.unique(np.concatenate([[0.0, L], bps]))
    pieces = [
        np.linspace(edges[i], edges[i + 1], panels_per_segment + 1)
        for i in range(edges.size - 1)
    ]
    boundaries = np.unique(np.concatenate(pieces))
    return PanelMesh(boundaries, order=order)


def dyadic_refine(mesh: PanelMesh, targets, depth: int, side: str = "both") -> PanelMesh:
    """Bisect the panel(s) adjacent to each target toward it, ``depth`` times.

    The finest panel next to a target ends up with width (original width) * 2^-depth.
    ``side`` selects "left", "right", or "both" neighbours; targets at 0 wrap to
    the last panel for their left side.
    """
    if depth < 0:
        raise ParameterError("refinement depth must be nonnegative")
    if side not in ("both", "left", "right"):
        raise ParameterError(f"unknown refinement side {side!r}")
    if depth == 0:
        return mesh

    bnd = mesh.boundaries
    new_points = []
    for t in np.atleast_1d(np.asarray(targets, dtype=float)):
        hits = np.nonzero(np.abs(bnd - t) <= _BOUNDARY_TOL * max(1.0, mesh.L))[0]
        if hits.size == 0:
            raise RefinementError(f"target {t} is not a panel boundary")
        i = int(hits[0])
        if side in ("both", "left"):
            # panel ending at the target; wrap across the periodic seam for t = 0
            a, b = (bnd[-2], bnd[-1]) if i == 0 else (bnd[i - 1], bnd[i])
            w = b - a
            new_points.extend(b - w * 0.5 ** j for j in range(1, depth + 1))
        if side in ("both", "right"):
            # panel starting at the target; targets at L wrap to the first panel
            j0 = 0 if i == bnd.size - 1 else i
            a, b = bnd[j0], bnd[j0 + 1]
            w = b - a
            new_points.extend(a + w * 0.5 ** j for j in range(1, depth + 1))
    boundaries = np.unique(np.concatenate([bnd, new_points]))
    return PanelMesh(boundaries, order=mesh.order, parent=mesh)


@dataclass(frozen=True)
class SplitRule:
    """Two k-point sub-rules splitting a panel at an interior point."""

    left_nodes: np.ndarray
    left_weights: np.ndarray
    right_nodes: np.ndarray
    right_weights: np.ndarray

    @property
    def nodes(self):
        return np.concatenate([self.left_nodes, self.right_nodes])

    @property
    def weights(self):
        return np.concatenate([self.left_weights, self.right_weights])


def split_rule(panel, x: float, k: int = 16) -> SplitRule:
    """Gauss-Legendre k-point rules on [a, x] and [x, b] for a_i < x < b_i."""
    a, b = float(panel[0]), float(panel[1])
    if not a < x < b:
        raise DegenerateSplitError(f"split point {x} must lie strictly inside ({a}, {b})")
    ln, lw = mapped_rule(a, x, k)
    rn, rw = mapped_rule(x, b, k)
    return SplitRule(ln, lw, rn, rw)

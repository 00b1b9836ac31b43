import numpy as np
import pytest

from beltrami.errors import (
    AxisSeparationError,
    GeometryError,
    NonSmoothPointError,
    ParameterError,
)
from beltrami.geometry import (
    circular_torus,
    curve_from_catalog,
    polygon_toroid,
    unit_square_toroid,
)

RNG = np.random.default_rng(11)


def test_torus_catalog():
    curve = curve_from_catalog("circular-torus", {"inner": 1.0, "outer": 2.0})
    assert curve.L == pytest.approx(np.pi)
    assert curve.breakpoints.size == 0
    p = curve.eval_point(0.0)
    assert (p.r, p.z) == (2.0, 0.0)
    assert p.dr == pytest.approx(0.0, abs=1e-15)
    # generating circle: center (1.5, 0), radius 0.5
    s = RNG.uniform(0, curve.L, 50)
    d = curve.sample(s)
    assert np.max(np.abs((d.r - 1.5) ** 2 + d.z**2 - 0.25)) < 1e-14


def test_square_toroid_catalog():
    curve = curve_from_catalog(
        "polygon-toroid", {"vertices": [(2, 0), (1, 0), (1, 1), (2, 1)]})
    assert curve.L == 4.0
    assert np.allclose(curve.breakpoints, [0, 1, 2, 3])
    p = curve.eval_point(2.0, side="-")
    assert (p.r, p.z) == (1.0, 1.0)  # top inner edge


def test_axis_violation():
    with pytest.raises(AxisSeparationError):
        polygon_toroid([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)])
    with pytest.raises(AxisSeparationError):
        circular_torus(-1.0, 2.0)
    with pytest.raises(ParameterError):
        circular_torus(2.0, 1.0)


def test_self_intersection():
    with pytest.raises(GeometryError):
        polygon_toroid([(1, 0), (2, 1), (2, 0), (1, 1)])  # bowtie


def test_unknown_catalog_name():
    with pytest.raises(ParameterError):
        curve_from_catalog("sphere", {})


def test_eval_point_sides(square):
    mid = square.eval_point(0.5)
    assert (mid.r, mid.z, mid.dr, mid.dz) == (1.5, 0.0, -1.0, 0.0)
    left = square.eval_point(2.0, side="left")
    right = square.eval_point(2.0, side="right")
    assert (left.dr, left.dz) == (0.0, 1.0)
    assert (right.dr, right.dz) == (1.0, 0.0)
    with pytest.raises(NonSmoothPointError):
        square.eval_point(2.0)


def test_arclength_parameterization(torus, square):
    for curve in (torus, square):
        s = RNG.uniform(0, curve.L, 1000)
        if curve.breakpoints.size:
            s = s[~np.isin(s, curve.breakpoints)]
        d = curve.sample(s)
        assert np.max(np.abs(d.dr**2 + d.dz**2 - 1.0)) < 1e-12


def test_periodic_wraparound(torus, square):
    # dyadic arclengths wrap exactly
    s = np.arange(1, 16) / 4.0
    s = s[s % 1.0 != 0]  # keep away from the square's breakpoints
    a = square.sample(s)
    b = square.sample(s + square.L)
    for name in ("r", "z", "dr", "dz"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    s = RNG.uniform(0.01, torus.L - 0.01, 200)
    a, b = torus.sample(s), torus.sample(s + torus.L)
    assert np.max(np.abs(a.r - b.r)) < 1e-13
    assert np.max(np.abs(a.dz - b.dz)) < 1e-12


def test_mean_curvature_values(torus, square):
    # outer equator of the (1,2)-torus: profile curvature 2, azimuthal 1/2
    assert torus.mean_curvature(0.0) == pytest.approx(1.25, abs=1e-12)
    # profile circle has curvature magnitude 1/0.5 everywhere
    s = RNG.uniform(0, torus.L, 64)
    d = torus.sample(s)
    kappa = d.dr * d.d2z - d.dz * d.d2r
    assert np.max(np.abs(np.abs(kappa) - 2.0)) < 1e-12
    # flat horizontal face of the square toroid
    assert square.mean_curvature(0.5) == 0.0
    with pytest.raises(NonSmoothPointError):
        square.mean_curvature(2.0)


def test_curvature_consistency_with_restriction_formula(torus):
    """Harmonic-restriction cross-check pinning the (normal, H) sign pairing.

    For v = x_1, Delta_Gamma(v|_Gamma) computed by the restriction formula
    -2 H dv/dn (v is linear and harmonic) must match a pseudo-spectral
    application of the decoupled per-mode operators to v|_Gamma.
    """
    from beltrami.azimuthal import decompose, synthesize, theta_grid, FourierStack
    from beltrami.hodge import panel_derivative
    from beltrami.quadrature import build_mesh

    mesh = build_mesh(torus.L, 24)
    ntheta = 16
    d = torus.sample(mesh.flat_nodes)
    theta = theta_grid(ntheta)
    v_grid = d.r[None, :] * np.cos(theta)[:, None]

    # restriction formula: f = Delta v - 2 H dv/dn - d2v/dn2 with v = x_1
    H = torus.mean_curvature(mesh.flat_nodes)
    dv_dn = d.dz[None, :] * np.cos(theta)[:, None]  # n . e_1
    f_restrict = -2.0 * H[None, :] * dv_dn

    # pseudo-spectral surface Laplacian, mode by mode
    stack = decompose(v_grid)
    out = np.zeros_like(stack.coeffs)
    for row in range(ntheta):
        n = row if row < ntheta // 2 else row - ntheta
        c = stack.coeffs[row]
        d1 = panel_derivative(mesh, c.real) + 1j * panel_derivative(mesh, c.imag)
        d2 = panel_derivative(mesh, d1.real) + 1j * panel_derivative(mesh, d1.imag)
        out[row] = d2 + (d.dr / d.r) * d1 - (n**2 / d.r**2) * c
    f_spectral = synthesize(FourierStack(out))

    num = np.sqrt(np.sum((f_spectral - f_restrict) ** 2))
    den = np.sqrt(np.sum(f_restrict**2))
    assert num / den < 1e-8


def test_closure_and_axis_separation_invariants(torus, square):
    for curve in (torus, square):
        a = curve.sample(np.array([0.0]), side="+")
        b = curve.sample(np.array([curve.L]), side="-")
        assert abs(a.r[0] - b.r[0]) < 1e-12
        assert abs(a.z[0] - b.z[0]) < 1e-12
        s = RNG.uniform(0, curve.L, 500)
        assert np.min(curve.sample(s, side="+").r) > 0

import numpy as np
import pytest

from conftest import analytic_poisson_integral

from beltrami.errors import (
    DegenerateSplitError,
    ExtrapolationError,
    ParameterError,
    RefinementError,
)
from beltrami.kernels import g_poisson
from beltrami.quadrature import (
    PanelMesh,
    bary_weights,
    build_mesh,
    diff_matrix,
    dyadic_refine,
    gauss_legendre,
    interp_matrix,
    lagrange_interp,
    split_rule,
)

RNG = np.random.default_rng(7)


class TestGaussLegendre:
    def test_one_point(self):
        x, w = gauss_legendre(1)
        assert x == pytest.approx([0.0]) and w == pytest.approx([2.0])

    def test_two_point(self):
        x, w = gauss_legendre(2)
        assert np.allclose(x, [-1 / np.sqrt(3), 1 / np.sqrt(3)])
        assert np.allclose(w, [1.0, 1.0])

    def test_sixteen_point_exactness(self):
        x, w = gauss_legendre(16)
        assert abs(np.sum(w * x**31)) < 1e-14  # odd, within exactness degree 31
        for d in range(0, 32):
            exact = 2 / (d + 1) if d % 2 == 0 else 0.0
            assert np.sum(w * x**d) == pytest.approx(exact, abs=2e-14)

    def test_basic_structure(self):
        for k in (4, 16, 64):
            x, w = gauss_legendre(k)
            assert np.all(np.diff(x) > 0)
            assert np.all(w > 0)
            assert np.sum(w) == pytest.approx(2.0, abs=1e-14)

    def test_bad_order(self):
        for k in (0, 65, -3, 2.5):
            with pytest.raises(ParameterError):
                gauss_legendre(k)


class TestBuildMesh:
    def test_square_faces(self):
        mesh = build_mesh(4.0, 1, [0.0, 1.0, 2.0, 3.0])
        assert mesh.n_panels == 4
        assert np.allclose(np.diff(mesh.boundaries), 1.0)

    def test_uniform(self):
        mesh = build_mesh(2 * np.pi, 8)
        assert mesh.n_panels == 8
        assert np.allclose(np.diff(mesh.boundaries), np.pi / 4)

    def test_bad_breakpoint(self):
        with pytest.raises(ParameterError):
            build_mesh(4.0, 1, [4.0])
        with pytest.raises(ParameterError):
            build_mesh(4.0, 1, [-0.5])
        with pytest.raises(ParameterError):
            build_mesh(4.0, 0)

    def test_weights_sum_to_length(self):
        for L, pps, bps in ((4.0, 3, [0, 1, 2, 3]), (np.pi, 7, []), (1.0, 2, [0.3])):
            mesh = build_mesh(L, pps, bps)
            assert abs(np.sum(mesh.flat_weights) - L) < 1e-13 * L

    def test_tiling(self):
        mesh = build_mesh(4.0, 2, [0, 1, 2, 3])
        assert mesh.boundaries[0] == 0.0 and mesh.boundaries[-1] == 4.0
        assert np.all(np.diff(mesh.boundaries) > 0)


class TestDyadicRefine:
    def test_depth_widths(self):
        mesh = build_mesh(4.0, 1, [0, 1, 2, 3])
        ref = dyadic_refine(mesh, [2.0], 3)
        widths = np.diff(ref.boundaries)
        i = np.searchsorted(ref.boundaries, 2.0)
        assert widths[i - 1] == pytest.approx(0.125)  # left of target
        assert widths[i] == pytest.approx(0.125)  # right of target
        assert ref.parent is mesh

    def test_depth_zero_identity(self):
        mesh = build_mesh(4.0, 1, [0, 1, 2, 3])
        assert dyadic_refine(mesh, [2.0], 0) is mesh

    def test_panel_count_growth(self):
        mesh = build_mesh(4.0, 1, [0, 1, 2, 3])
        for depth in (1, 2, 5):
            ref = dyadic_refine(mesh, [2.0], depth)
            assert ref.n_panels == mesh.n_panels + 2 * depth

    def test_one_sided(self):
        mesh = build_mesh(4.0, 1, [0, 1, 2, 3])
        ref = dyadic_refine(mesh, [2.0], 4, side="left")
        assert ref.n_panels == mesh.n_panels + 4

    def test_wrap_at_zero(self):
        mesh = build_mesh(4.0, 1, [0, 1, 2, 3])
        ref = dyadic_refine(mesh, [0.0], 2)
        widths = np.diff(ref.boundaries)
        assert widths[0] == pytest.approx(0.25)
        assert widths[-1] == pytest.approx(0.25)

    def test_preserves_length(self):
        mesh = build_mesh(4.0, 2, [0, 1, 2, 3])
        ref = dyadic_refine(mesh, [2.0], 12)
        assert ref.boundaries[-1] == 4.0
        assert abs(np.sum(ref.flat_weights) - 4.0) < 1e-13 * 4

    def test_bad_target(self):
        mesh = build_mesh(4.0, 1, [0, 1, 2, 3])
        with pytest.raises(RefinementError):
            dyadic_refine(mesh, [2.3], 1)


class TestInterpolation:
    def test_polynomial_reproduction(self):
        mesh = build_mesh(1.0, 1)
        nodes = mesh.nodes[0]
        vals = nodes**5
        xs = RNG.uniform(0, 1, 25)
        out = np.array([lagrange_interp(nodes, vals, x, panel=(0, 1)) for x in xs])
        assert np.max(np.abs(out - xs**5)) < 1e-13

    def test_constants(self):
        nodes = build_mesh(1.0, 1).nodes[0]
        assert lagrange_interp(nodes, np.full(16, 3.5), 0.77, panel=(0, 1)) == pytest.approx(3.5)

    def test_sin_accuracy(self):
        nodes = build_mesh(1.0, 1).nodes[0]
        out = lagrange_interp(nodes, np.sin(nodes), 0.37, panel=(0, 1))
        assert out == pytest.approx(np.sin(0.37), abs=1e-12)

    def test_extrapolation_refused(self):
        nodes = build_mesh(1.0, 1).nodes[0]
        with pytest.raises(ExtrapolationError):
            lagrange_interp(nodes, np.sin(nodes), 1.2, panel=(0, 1))

    def test_exact_at_nodes(self):
        nodes = build_mesh(1.0, 1).nodes[0]
        vals = RNG.standard_normal(16)
        T = interp_matrix(nodes, nodes)
        assert np.allclose(T, np.eye(16), atol=1e-12)
        assert lagrange_interp(nodes, vals, nodes[7]) == pytest.approx(vals[7])

    def test_diff_matrix(self):
        nodes = build_mesh(1.0, 1).nodes[0]
        D = diff_matrix(nodes)
        # exact for polynomials of degree <= 15
        assert np.max(np.abs(D @ nodes**7 - 7 * nodes**6)) < 1e-11
        assert np.max(np.abs(D @ np.ones(16))) < 1e-12

    def test_bary_weights_alternate(self):
        w = bary_weights(build_mesh(1.0, 1).nodes[0])
        assert np.all(w[:-1] * w[1:] < 0)


class TestSplitRule:
    def test_constant_halves(self):
        r = split_rule((0.0, 1.0), 0.5)
        assert np.sum(r.left_weights) == pytest.approx(0.5, abs=1e-15)
        assert np.sum(r.right_weights) == pytest.approx(0.5, abs=1e-15)

    def test_abs_kink_exact(self):
        x = 0.437
        r = split_rule((0.0, 1.0), x)
        val = np.sum(r.weights * np.abs(x - r.nodes))
        exact = x**2 / 2 + (1 - x) ** 2 / 2
        assert val == pytest.approx(exact, abs=1e-14)

    def test_poisson_kernel_split(self):
        # integral_0^1 G_L(0.3 - t) dt over a full period vanishes; a partial
        # interval matches the piecewise-quadratic antiderivative (-0.007)
        r = split_rule((0.0, 1.0), 0.3)
        assert np.sum(r.weights * g_poisson(0.3 - r.nodes, 1.0)) == pytest.approx(0.0, abs=1e-15)
        r = split_rule((0.0, 0.8), 0.3)
        val = np.sum(r.weights * g_poisson(0.3 - r.nodes, 1.0))
        assert val == pytest.approx(-0.007, abs=1e-15)
        assert analytic_poisson_integral(0.3, 0.0, 0.8, 1.0) == pytest.approx(-0.007, abs=1e-15)

    def test_degenerate(self):
        for x in (0.0, 1.0, -1.0, 2.0):
            with pytest.raises(DegenerateSplitError):
                split_rule((0.0, 1.0), x)


def test_l2_embedding_convergence():
    # sum w g^2 -> int g^2 with at least 16th-order decay under refinement
    L = 2 * np.pi
    g = lambda x: np.exp(np.sin(3 * x))
    ref_mesh = build_mesh(L, 64)
    ref = np.sum(ref_mesh.flat_weights * g(ref_mesh.flat_nodes) ** 2)
    errs = []
    for M in (2, 3, 4):
        mesh = build_mesh(L, M)
        errs.append(abs(np.sum(mesh.flat_weights * g(mesh.flat_nodes) ** 2) - ref))
    assert errs[1] < errs[0] * (2.0 / 3.0) ** 16
    assert errs[2] < errs[1] * (3.0 / 4.0) ** 16


def test_nystrom_row_against_analytic_antiderivative():
    # far-field sums + split near field reproduce int_0^L G_L(x - t) sigma(t) dt
    # exactly for piecewise-quadratic integrands (random panels, random targets)
    from beltrami.kernels import make_kernel
    from beltrami.periodic_ode import LayerOperators

    L = 1.7
    cuts = np.sort(RNG.uniform(0.1, L - 0.1, 4))
    mesh = PanelMesh(np.concatenate([[0.0], cuts, [L]]), order=16)
    layers = LayerOperators(mesh, make_kernel("poisson", L), dense=True)
    coeffs = RNG.standard_normal(3)
    t = mesh.flat_nodes
    sigma = coeffs[0] + coeffs[1] * t + coeffs[2] * t**2
    conv = layers.S @ sigma
    dconv = layers.D @ sigma
    for idx in RNG.choice(mesh.n_nodes, 12, replace=False):
        x = t[idx]
        exact = sum(
            coeffs[m] * sum(
                analytic_poisson_integral(x, mesh.boundaries[i], mesh.boundaries[i + 1], L, moment=m)
                for i in range(mesh.n_panels)
            )
            for m in range(3)
        )
        exact_d = sum(
            coeffs[m] * sum(
                analytic_poisson_integral(x, mesh.boundaries[i], mesh.boundaries[i + 1], L,
                                          moment=m, deriv=True)
                for i in range(mesh.n_panels)
            )
            for m in range(3)
        )
        assert conv[idx] == pytest.approx(exact, abs=1e-13)
        assert dconv[idx] == pytest.approx(exact_d, abs=1e-13)


def test_mesh_validation():
    with pytest.raises(Exception):
        PanelMesh([0.5, 1.0])  # must start at 0
    with pytest.raises(Exception):
        PanelMesh([0.0, 1.0, 0.5])
    mesh = build_mesh(4.0, 1, [1, 2])
    mesh.require_boundaries([1.0, 2.0])
    with pytest.raises(Exception):
        mesh.require_boundaries([1.5])

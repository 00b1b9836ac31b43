import numpy as np
import pytest

from beltrami.errors import ParameterError
from beltrami.kernels import (
    KernelKind,
    g_poisson,
    g_poisson_deriv,
    g_yukawa,
    g_yukawa_deriv,
    make_kernel,
)
from beltrami.quadrature import build_mesh

RNG = np.random.default_rng(20240517)


def quad(fn, L, panels=12):
    mesh = build_mesh(L, panels)
    return mesh.flat_weights @ fn(mesh.flat_nodes)


def test_poisson_spot_values():
    L = 2 * np.pi
    assert g_poisson(0.0, L) == pytest.approx(-np.pi / 6, abs=1e-15)
    assert g_poisson(L / 2, L) == pytest.approx(np.pi / 12, abs=1e-15)
    assert g_poisson_deriv(1.0, 4.0) == pytest.approx(0.25, abs=1e-15)
    assert g_poisson_deriv(2.0, 4.0) == 0.0  # G'(L/2) = 0


@pytest.mark.parametrize("L", [1.0, 2 * np.pi, 4.0])
def test_poisson_mean_zero(L):
    assert abs(quad(lambda x: g_poisson(x, L), L)) < 1e-14 * max(1.0, L)


def test_poisson_deriv_one_sided_limits():
    L = 2 * np.pi
    eps = 1e-13
    assert g_poisson_deriv(eps, L) == pytest.approx(0.5, abs=1e-12)
    assert g_poisson_deriv(L - eps, L) == pytest.approx(-0.5, abs=1e-12)
    assert g_poisson_deriv(0.0, L, side="+") == pytest.approx(0.5)
    assert g_poisson_deriv(0.0, L, side="-") == pytest.approx(-0.5)
    with pytest.raises(ParameterError):
        g_poisson_deriv(0.0, L)
    with pytest.raises(ParameterError):
        g_yukawa_deriv(0.0, L)


def test_yukawa_one_sided_limits():
    L = 3.0
    assert g_yukawa_deriv(0.0, L, side="+") == pytest.approx(0.5)
    assert g_yukawa_deriv(0.0, L, side="-") == pytest.approx(-0.5)


@pytest.mark.parametrize("L", [1.0, 2 * np.pi, 4.0])
def test_yukawa_mean_is_minus_one(L):
    # S_Y applied to sigma = 1 must give the solution v = -1 of v'' - v = 1
    assert quad(lambda x: g_yukawa(x, L), L) == pytest.approx(-1.0, abs=1e-13)


def test_yukawa_evenness():
    xs = RNG.uniform(-20, 20, 100)
    assert np.max(np.abs(g_yukawa(xs, 4.0) - g_yukawa(-xs, 4.0))) == 0.0


@pytest.mark.parametrize("deriv", [False, True])
@pytest.mark.parametrize("tag", ["poisson", "yukawa"])
def test_periodicity(tag, deriv):
    L = 4.0
    kern = KernelKind(tag, L)
    # dyadic points wrap exactly; generic points to rounding
    xs = np.arange(1, 64) / 16.0
    f = kern.deriv if deriv else kern.value
    assert np.max(np.abs(f(xs + L) - f(xs))) == 0.0
    xs = RNG.uniform(0.01, L - 0.01, 1000)
    assert np.max(np.abs(f(xs + L) - f(xs))) < 1e-13


def test_fourier_symbols():
    # S_L sin(2 pi n x / L) = -(L / 2 pi n)^2 sin(...), S_Y cos -> -cos/(1+k^2).
    # Targets sit on panel boundaries so the kernel kink never falls inside a
    # panel and plain panel sums are high-order accurate.
    L = 2 * np.pi
    mesh = build_mesh(L, 16)
    t, w = mesh.flat_nodes, mesh.flat_weights
    xs = mesh.boundaries[1:-1:2]
    for n in (1, 2, 5):
        conv = np.array([np.sum(w * g_poisson(x - t, L) * np.sin(2 * np.pi * n * t / L)) for x in xs])
        expected = -((L / (2 * np.pi * n)) ** 2) * np.sin(2 * np.pi * n * xs / L)
        assert np.max(np.abs(conv - expected)) < 1e-12
    for L in (1.0, 2 * np.pi):
        mesh = build_mesh(L, 16)
        t, w = mesh.flat_nodes, mesh.flat_weights
        xs = mesh.boundaries[1:-1:2]
        k = 2 * np.pi / L
        conv = np.array([np.sum(w * g_yukawa(x - t, L) * np.cos(k * t)) for x in xs])
        expected = -np.cos(k * xs) / (1 + k**2)
        assert np.max(np.abs(conv - expected)) < 1e-12


def test_poisson_defining_property_by_finite_differences():
    # (S_L sigma)'' = sigma for smooth mean-zero sigma, with S_L sigma evaluated
    # through the split-rule machinery so the kink is integrated exactly
    from beltrami.linalg import SolveReport
    from beltrami.periodic_ode import ModeSolution

    L = 2 * np.pi
    mesh = build_mesh(L, 24)
    t = mesh.flat_nodes
    sigma = np.exp(np.sin(t)) * np.cos(t)  # mean-zero: d/dt exp(sin t)
    pot = ModeSolution(mesh, make_kernel("poisson", L), sigma, 0.0,
                       SolveReport(0, 0.0, True))

    h = 1e-4
    for x in (0.7, 2.1, 5.0):
        d2 = (pot.eval_u(x + h) - 2 * pot.eval_u(x) + pot.eval_u(x - h)) / h**2
        assert d2 == pytest.approx(np.exp(np.sin(x)) * np.cos(x), abs=5e-7)


@pytest.mark.parametrize("tag", ["poisson", "yukawa"])
def test_smooth_away_from_origin(tag):
    # second divided differences stay bounded by the interior second derivative
    L = 2 * np.pi
    kern = KernelKind(tag, L)
    xs = np.linspace(0.2, L - 0.2, 400)
    h = xs[1] - xs[0]
    vals = kern.value(xs)
    dd2 = np.abs(np.diff(vals, 2)) / h**2
    assert np.max(dd2) < 2.0  # |G''| <= 1/L (poisson), cosh-scale (yukawa)


def test_yukawa_matches_centered_closed_form():
    # The printed closed form -exp(-|x~|)/2 - exp(-L)/(1-exp(-L)) cosh(x~) equals
    # the implementation when x~ is the representative of x in [-L/2, L/2); the
    # uncentered branch in [L/2, 3L/2) breaks evenness and periodicity.
    L = 3.0
    xs = RNG.uniform(-2 * L, 2 * L, 200)
    xt = np.mod(xs + L / 2, L) - L / 2
    closed = -0.5 * np.exp(-np.abs(xt)) - (np.exp(-L) / (1 - np.exp(-L))) * np.cosh(xt)
    assert np.max(np.abs(g_yukawa(xs, L) - closed)) < 1e-15

    xt_shifted = np.mod(xs - L / 2, L) + L / 2
    shifted = -0.5 * np.exp(-np.abs(xt_shifted)) - (np.exp(-L) / (1 - np.exp(-L))) * np.cosh(xt_shifted)
    assert np.max(np.abs(shifted - shifted[::-1])) > 0  # not even in general
    assert np.max(np.abs(g_yukawa(xs, L) - shifted)) > 1e-3


def test_kernel_kind_validation():
    with pytest.raises(ParameterError):
        KernelKind("laplace", 1.0)
    with pytest.raises(ParameterError):
        KernelKind("poisson", -1.0)
    with pytest.raises(ParameterError):
        make_kernel(KernelKind("poisson", 1.0), 2.0)
    k = make_kernel("yukawa", 5.0)
    assert k.L == 5.0 and not k.has_mean_bookkeeping

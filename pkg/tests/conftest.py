"""Shared fixtures and independent oracles for the test suite."""

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from beltrami.geometry import circular_torus, unit_square_toroid
from beltrami.quadrature import diff_matrix, interp_matrix


@pytest.fixture(scope="session")
def torus():
    return circular_torus(1.0, 2.0)


@pytest.fixture(scope="session")
def square():
    return unit_square_toroid()


def poisson_kernel_pieces(L, deriv=False):
    """Polynomial pieces of the periodic Poisson kernel on (-L, 0) and [0, L)."""
    if deriv:
        right = Polynomial([0.5, -1.0 / L])
        left = Polynomial([-0.5, -1.0 / L])
    else:
        right = Polynomial([-L / 12, 0.5, -1 / (2 * L)])
        left = Polynomial([-L / 12, -0.5, -1 / (2 * L)])
    return left, right


def analytic_poisson_integral(x, t0, t1, L, moment=0, deriv=False):
    """Closed form of integral_{t0}^{t1} t^moment K(x - t) dt for the periodic
    Poisson kernel K = G_L (or G_L' with deriv=True).

    Pure piecewise-polynomial antidifferentiation, independent of any
    quadrature; valid for 0 <= t0 < t1 <= L and 0 <= x <= L.
    """
    left, right = poisson_kernel_pieces(L, deriv=deriv)
    weight = Polynomial([x, -1.0]) ** moment  # t^moment = (x - tau)^moment
    y0, y1 = x - t1, x - t0
    total = 0.0
    if y1 > 0:
        q = (right * weight).integ()
        lo = max(y0, 0.0)
        total += q(y1) - q(lo)
    if y0 < 0:
        q = (left * weight).integ()
        hi = min(y1, 0.0)
        total += q(hi) - q(y0)
    return total


def one_sided_values(mesh, u_nodes, s_e):
    """One-sided values and derivatives of the per-panel interpolants of nodal
    data at a panel boundary s_e; the left side wraps across the seam at 0."""
    bnd = mesh.boundaries
    k = mesh.order
    hits = np.nonzero(np.abs(bnd - s_e) <= 1e-12)[0]
    assert hits.size, f"{s_e} is not a panel boundary"
    i = int(hits[0])
    left_panel = mesh.n_panels - 1 if i == 0 else i - 1
    right_panel = 0 if i == bnd.size - 1 else min(i, mesh.n_panels - 1)
    x_left = bnd[-1] if i == 0 else s_e
    x_right = bnd[0] if i == bnd.size - 1 else s_e

    out = []
    for panel, x in ((left_panel, x_left), (right_panel, x_right)):
        nodes = mesh.nodes[panel]
        vals = u_nodes[panel * k : (panel + 1) * k]
        T = interp_matrix(nodes, np.array([x]))
        D = diff_matrix(nodes)
        out.append((complex(T @ vals), complex(T @ (D @ vals))))
    (u_minus, du_minus), (u_plus, du_plus) = out
    return u_minus, u_plus, du_minus, du_plus

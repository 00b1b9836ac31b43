"""Periodic Green's functions for the 1D Poisson and Yukawa operators.

``g_poisson`` is the L-periodic, mean-zero kernel inverting u'' on mean-zero
data; ``g_yukawa`` is the L-periodic kernel inverting u'' - u.  Both are
continuous and piecewise smooth with a single derivative jump at x = 0 (mod L),
so their convolutions map L^r data to C^1 periodic functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

KERNEL_TAGS = ("poisson", "yukawa")


def _wrap(x, L):
    # floor-mod into [0, L); arguments of the convolutions span (-L, L)
    return np.mod(np.asarray(x, dtype=float), L)


def g_poisson(x, L):
    """G(x) = -(mod(x,L) - L/2)^2 / (2L) + L/24, the mean-zero periodic kernel of d^2/dx^2."""
    if not L > 0:
        raise ParameterError("period must be positive")
    m = _wrap(x, L)
    return -((m - L / 2) ** 2) / (2 * L) + L / 24


def g_poisson_deriv(x, L, side=None):
    """G'(x) = -(mod(x,L) - L/2)/L.

    G' jumps at x = 0 (mod L): the one-sided limits are +1/2 and -1/2.  Exact
    evaluation at the jump requires ``side`` ("+" or "-"); otherwise it is
    refused.
    """
    if not L > 0:
        raise ParameterError("period must be positive")
    m = _wrap(x, L)
    m = _resolve_jump(m, L, side)
    return -(m - L / 2) / L


def g_yukawa(x, L):
    """Periodic Green's function of v'' - v: -cosh(mod(x,L) - L/2) / (2 sinh(L/2)).

    Even, L-periodic, with integral -1 over a period (Fourier symbol
    -1/(1 + (2 pi k / L)^2)).
    """
    if not L > 0:
        raise ParameterError("period must be positive")
    m = _wrap(x, L)
    return -np.cosh(m - L / 2) / (2 * np.sinh(L / 2))


def g_yukawa_deriv(x, L, side=None):
    """Derivative of ``g_yukawa``; one-sided limits at the jump are +1/2 and -1/2."""
    if not L > 0:
        raise ParameterError("period must be positive")
    m = _wrap(x, L)
    m = _resolve_jump(m, L, side)
    return -np.sinh(m - L / 2) / (2 * np.sinh(L / 2))


def _resolve_jump(m, L, side):
    at_jump = m == 0.0
    if not np.any(at_jump):
        return m
    if side is None:
        raise ParameterError(
            "kernel derivative evaluated at the jump x = 0 (mod L); pass side='+' or side='-'"
        )
    if side in ("+", "right"):
        return m  # m = 0 already yields the right limit +1/2
    if side in ("-", "left"):
        return np.where(at_jump, L, m) if np.ndim(m) else L
    raise ParameterError(f"unknown side {side!r}")


@dataclass(frozen=True)
class KernelKind:
    """Kernel selector (tag in {'poisson', 'yukawa'}) bound to a period L."""

    tag: str
    L: float

    def __post_init__(self):
        if self.tag not in KERNEL_TAGS:
            raise ParameterError(f"unknown kernel {self.tag!r}; expected one of {KERNEL_TAGS}")
        if not self.L > 0:
            raise ParameterError("kernel period must be positive")

    @property
    def has_mean_bookkeeping(self):
        # the Poisson kernel is mean-zero, so the representation needs the
        # additive constant; the Yukawa kernel does not
        return self.tag == "poisson"

    def value(self, x):
        if self.tag == "poisson":
            return g_poisson(x, self.L)
        return g_yukawa(x, self.L)

    def deriv(self, x, side=None):
        if self.tag == "poisson":
            return g_poisson_deriv(x, self.L, side=side)
        return g_yukawa_deriv(x, self.L, side=side)


def make_kernel(kernel, L) -> KernelKind:
    """Normalize a tag or KernelKind to a KernelKind with period ``L``."""
    if isinstance(kernel, KernelKind):
        if abs(kernel.L - L) > 1e-12 * max(1.0, L):
            raise ParameterError(f"kernel period {kernel.L} does not match domain length {L}")
        return kernel
    return KernelKind(str(kernel), float(L))

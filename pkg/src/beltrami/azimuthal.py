"""Fourier analysis/synthesis in the azimuthal angle on equispaced grids.

Grids are (n_theta, n_s) arrays with theta_j = 2 pi j / n_theta along axis 0.
Coefficients follow f(theta, s) = sum_n c_n(s) exp(i n theta) with n in
{-n_theta/2, ..., n_theta/2 - 1} stored in FFT order.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError


def mode_numbers(n_theta: int) -> np.ndarray:
    """Signed mode numbers in FFT storage order."""
    return np.fft.fftfreq(n_theta, d=1.0 / n_theta).astype(int)


def theta_grid(n_theta: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n_theta) / n_theta


class FourierStack:
    """Per-mode complex coefficient samples on the arclength mesh nodes."""

    def __init__(self, coeffs: np.ndarray, mesh=None):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim != 2:
            raise ParameterError("coefficient stack must be 2-dimensional")
        n_theta = coeffs.shape[0]
        if n_theta < 2 or n_theta % 2:
            raise ParameterError("azimuthal grid size must be even and >= 2")
        self.coeffs = coeffs
        self.mesh = mesh

    @property
    def n_theta(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n_s(self) -> int:
        return self.coeffs.shape[1]

    def mode(self, n: int) -> np.ndarray:
        """Coefficient samples of mode ``n`` (signed index)."""
        half = self.n_theta // 2
        if not -half <= n < half:
            raise ParameterError(f"mode {n} outside [-{half}, {half})")
        return self.coeffs[n % self.n_theta]

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    @classmethod
    def zeros(cls, n_theta: int, n_s: int, mesh=None) -> "FourierStack":
        return cls(np.zeros((n_theta, n_s), dtype=complex), mesh=mesh)

    @classmethod
    def from_half_modes(cls, half_modes: dict, n_theta: int, n_s: int, mesh=None) -> "FourierStack":
        """Stack for real data from modes n >= 0; negatives filled by conjugation."""
        coeffs = np.zeros((n_theta, n_s), dtype=complex)
        half = n_theta // 2
        for n, row in half_modes.items():
            if not 0 <= n <= half:
                raise ParameterError(f"half-mode index {n} outside [0, {half}]")
            coeffs[n % n_theta] = row
            if 0 < n < half:
                coeffs[-n % n_theta] = np.conj(row)
        return cls(coeffs, mesh=mesh)


def decompose(grid: np.ndarray, mesh=None, theta=None) -> FourierStack:
    """Discrete Fourier coefficients of each theta-column of ``grid``."""
    grid = np.asarray(grid)
    if grid.ndim != 2:
        raise ParameterError("grid must be (n_theta, n_s)")
    n_theta = grid.shape[0]
    if n_theta < 2 or n_theta % 2:
        raise ParameterError("azimuthal grid size must be even and >= 2")
    if theta is not None:
        theta = np.asarray(theta, dtype=float)
        expected = theta_grid(n_theta)
        if theta.shape != expected.shape or np.max(np.abs(theta - expected)) > 1e-12:
            raise ParameterError("theta grid must be equispaced on [0, 2 pi)")
    return FourierStack(np.fft.fft(grid, axis=0) / n_theta, mesh=mesh)


def synthesize(stack: FourierStack, n_theta=None) -> np.ndarray:
    """Real grid synthesized from a conjugate-symmetric stack."""
    if n_theta is not None and n_theta != stack.n_theta:
        raise ParameterError("resampling in theta is not supported; sizes must match")
    grid = np.fft.ifft(stack.coeffs * stack.n_theta, axis=0)
    return np.real(grid)


def theta_derivative(stack: FourierStack) -> FourierStack:
    """Multiply each mode by (i n); the unpaired Nyquist mode is zeroed."""
    n = mode_numbers(stack.n_theta).astype(float)
    n[stack.n_theta // 2] = 0.0
    return FourierStack(stack.coeffs * (1j * n)[:, None], mesh=stack.mesh)

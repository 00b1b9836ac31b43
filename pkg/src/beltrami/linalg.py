"""Dense and matrix-free linear algebra: full GMRES and the sqrt(w) L^2 embedding."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ParameterError


class LinearOperator:
    """Square linear map given by a matvec callable."""

    def __init__(self, n: int, matvec: Callable[[np.ndarray], np.ndarray]):
        self.n = int(n)
        self._matvec = matvec

    @classmethod
    def from_matrix(cls, A: np.ndarray) -> "LinearOperator":
        A = np.asarray(A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ParameterError("operator matrix must be square")
        return cls(A.shape[0], lambda v: A @ v)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self._matvec(v)


def as_operator(A) -> LinearOperator:
    if isinstance(A, LinearOperator):
        return A
    return LinearOperator.from_matrix(A)


@dataclass
class SolveReport:
    """Outcome of an iterative solve."""

    iterations: int
    relative_residual: float
    converged: bool
    residual_history: list = field(default_factory=list)


def gmres(A, b, tol: float = 1e-14, max_iter=None, x0=None):
    """Full (non-restarted) GMRES with modified Gram-Schmidt and one
    reorthogonalization pass.

    Returns (x, SolveReport); non-convergence is reported, not raised.
    """
    op = as_operator(A)
    b = np.asarray(b, dtype=float)
    n = b.size
    if n != op.n:
        raise ParameterError("dimension mismatch between operator and right-hand side")
    m = n if max_iter is None else min(int(max_iter), n)

    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), SolveReport(0, 0.0, True, [0.0])
    r0 = b if x0 is None else b - op(np.asarray(x0, dtype=float))
    beta = np.linalg.norm(r0)
    if beta <= tol * bnorm:
        x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
        return x, SolveReport(0, beta / bnorm, True, [beta / bnorm])

    V = np.zeros((m + 1, n))
    H = np.zeros((m + 1, m))
    cs = np.zeros(m)
    sn = np.zeros(m)
    g = np.zeros(m + 1)
    g[0] = beta
    V[0] = r0 / beta
    history = [beta / bnorm]

    j = 0
    for j in range(m):
        w = op(V[j])
        for i in range(j + 1):
            h = V[i] @ w
            H[i, j] = h
            w -= h * V[i]
        for i in range(j + 1):  # one reorthogonalization pass
            c = V[i] @ w
            H[i, j] += c
            w -= c * V[i]
        H[j + 1, j] = np.linalg.norm(w)
        if H[j + 1, j] > 0:
            V[j + 1] = w / H[j + 1, j]

        for i in range(j):  # apply stored Givens rotations
            t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
            H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
            H[i, j] = t
        rho = np.hypot(H[j, j], H[j + 1, j])
        if rho == 0.0:
            cs[j], sn[j] = 1.0, 0.0
        else:
            cs[j], sn[j] = H[j, j] / rho, H[j + 1, j] / rho
        H[j, j] = rho
        H[j + 1, j] = 0.0
        g[j + 1] = -sn[j] * g[j]
        g[j] = cs[j] * g[j]

        res = abs(g[j + 1]) / bnorm
        history.append(res)
        if res <= tol:
            break

    k = j + 1
    y = np.linalg.solve(H[:k, :k], g[:k]) if k else np.zeros(0)
    x = V[:k].T @ y
    if x0 is not None:
        x = x + np.asarray(x0, dtype=float)
    res = history[-1]
    return x, SolveReport(k, float(res), bool(res <= tol), history)


def dense_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Direct LU solve (the oracle path); handles complex right-hand sides."""
    return np.linalg.solve(np.asarray(A), np.asarray(b))


@dataclass(frozen=True)
class WeightedEmbedding:
    """Diagonal conjugation by sqrt(w) mapping nodal values to the discrete L^2 frame.

    The 2-norm of ``scale(v)`` approximates the L^2([0, L]) norm of the
    function sampled by v.
    """

    sqrt_w: np.ndarray

    def scale(self, v):
        return self.sqrt_w * v

    def unscale(self, v):
        return v / self.sqrt_w

    def conjugate_matrix(self, A: np.ndarray) -> np.ndarray:
        """diag(sqrt w) A diag(1/sqrt w)."""
        return (A * self.sqrt_w[:, None]) / self.sqrt_w[None, :]

    def conjugate_operator(self, matvec) -> Callable[[np.ndarray], np.ndarray]:
        return lambda v: self.sqrt_w * matvec(v / self.sqrt_w)


def weighted_embedding(weights) -> WeightedEmbedding:
    """Embedding from positive quadrature weights; raises on non-positive entries."""
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise ParameterError("quadrature weights must be positive")
    return WeightedEmbedding(np.sqrt(w))

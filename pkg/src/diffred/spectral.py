"""Truncated SVD by block subspace iteration, residuals and stable rank."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import as_array
from .errors import ConfigError, NumericError
from .rng import Purpose, RandomStream

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1000

# singular values below this fraction of sigma_1 are treated as exact zeros
_RANK_CUTOFF = 1e-10


@dataclass(frozen=True)
class SpectralSummary:
    """Top-``k`` right singular structure of a data matrix.

    Attributes
    ----------
    sigma : ndarray, shape (k,)
        Singular values in nonincreasing order.
    V : ndarray, shape (D, k)
        Orthonormal right singular vectors; each column's largest-magnitude
        entry is positive.
    frob_sq : float
        Squared Frobenius norm of the full matrix, computed from the data.
    """

    sigma: np.ndarray
    V: np.ndarray
    frob_sq: float
    converged: bool
    iterations_used: int

    @property
    def k(self) -> int:
        return len(self.sigma)

    def p(self, k1: int) -> float:
        return explained_variance(self, k1)

    @property
    def stable_rank(self) -> float:
        return stable_rank(self.frob_sq, float(self.sigma[0]))


@dataclass(frozen=True)
class ResidualPair:
    A_k1: np.ndarray
    A_star: np.ndarray


def _orth(Y: np.ndarray) -> np.ndarray:
    Q, _ = np.linalg.qr(Y)
    return Q


def _fix_signs(V: np.ndarray) -> np.ndarray:
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def truncated_svd(
    A,
    k: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    stream: RandomStream | None = None,
) -> SpectralSummary:
    """Top-``k`` singular values and right singular vectors of ``A``.

    Subspace iteration with ``min(10, min(n, D) - k)`` oversampling vectors
    runs on the Gram matrix of the smaller side (``A^T A`` when ``D <= n``,
    ``A A^T`` otherwise), re-orthonormalizing every step. Iteration stops once
    no Ritz estimate of the top ``k`` squared singular values moves by more
    than ``tol * sigma_1**2`` and every Ritz residual of the Gram matrix is
    below the same threshold. The returned factors come from an exact SVD of ``A``
    restricted to the final right subspace, so ``V`` is orthonormal to
    working precision and ``||A V||_F^2 == sum(sigma**2)``.

    If ``max_iter`` is exhausted the best estimate is returned with
    ``converged=False`` and a :class:`RuntimeWarning` is issued.
    """
    X = as_array(A)
    n, D = X.shape
    m = min(n, D)
    k = int(k)
    if not 1 <= k <= m:
        raise ConfigError(f"k={k} outside [1, {m}] for a {n}x{D} matrix")
    if not tol > 0:
        raise ConfigError("tol must be positive")
    if max_iter < 1:
        raise ConfigError("max_iter must be at least 1")
    if stream is None:
        stream = RandomStream(0, Purpose.SVD_INIT, 0)

    frob_sq = float(np.sum(X * X))
    width = k + min(10, m - k)
    right_side = D <= n
    B = X.T @ X if right_side else X @ X.T

    Q = _orth(stream.gaussian(m * width).reshape(m, width))
    prev = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        BQ = B @ Q
        theta, Y = np.linalg.eigh(Q.T @ BQ)
        theta, Y = theta[::-1][:k], Y[:, ::-1][:, :k]
        scale = max(theta[0], np.finfo(float).tiny)
        ritz_residual = np.max(np.linalg.norm(BQ @ Y - (Q @ Y) * theta, axis=0))
        # compare squared estimates: square roots of noise-level Ritz values jitter at sqrt(eps)
        if prev is not None and np.max(np.abs(theta - prev)) <= tol * scale and ritz_residual <= tol * scale:
            converged = True
            break
        prev = theta
        Q = _orth(BQ)
    if not converged:
        warnings.warn(
            f"subspace iteration did not converge in {max_iter} iterations", RuntimeWarning, stacklevel=2
        )

    basis = Q if right_side else _orth(X.T @ Q)
    _, s, Wt = np.linalg.svd(X @ basis, full_matrices=False)
    V = _fix_signs(basis @ Wt[:k].T)
    sigma = s[:k].copy()
    V.setflags(write=False)
    sigma.setflags(write=False)
    return SpectralSummary(sigma=sigma, V=V, frob_sq=frob_sq, converged=converged, iterations_used=it)


def residual(A, summary: SpectralSummary, k1: int) -> ResidualPair:
    """Split ``A`` into its rank-``k1`` approximation and the residual.

    ``A_k1 = (A V_k1) V_k1^T``; the left factor is never formed.
    """
    X = as_array(A)
    if not 0 <= k1 <= summary.k:
        raise ConfigError(f"k1={k1} outside [0, {summary.k}]")
    if k1 == 0:
        return ResidualPair(np.zeros_like(X), X.copy())
    Vk = summary.V[:, :k1]
    A_k1 = (X @ Vk) @ Vk.T
    return ResidualPair(A_k1, X - A_k1)


def stable_rank(frob_sq: float, sigma1: float) -> float:
    """``||A||_F^2 / sigma_1^2``."""
    if not sigma1 > 0:
        raise NumericError("stable rank undefined for a zero matrix")
    if frob_sq < sigma1**2 * (1 - 1e-12):
        raise NumericError(f"frob_sq={frob_sq} is smaller than sigma1^2={sigma1**2}")
    return float(frob_sq) / float(sigma1) ** 2


def explained_variance(summary: SpectralSummary, k1: int) -> float:
    """Fraction of energy in the top ``k1`` components; 0 for ``k1 = 0``."""
    if not 0 <= k1 <= summary.k:
        raise ConfigError(f"k1={k1} outside [0, {summary.k}]")
    if k1 == 0 or summary.frob_sq == 0:
        return 0.0
    return float(min(1.0, np.sum(summary.sigma[:k1] ** 2) / summary.frob_sq))


def residual_stable_rank_curve(
    A,
    k1_max: int | None = None,
    summary: SpectralSummary | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> list:
    """Stable rank of the residual ``A - A_k1`` for ``k1 = 0 .. k1_max``.

    Returns a list of ``(k1, rho)`` pairs. When the residual becomes
    numerically zero before ``k1_max`` the curve stops there and a
    :class:`RuntimeWarning` says so.
    """
    X = as_array(A)
    m = min(X.shape)
    if k1_max is None:
        k1_max = m - 1
    if not 0 <= k1_max <= m - 1:
        raise ConfigError(f"k1_max={k1_max} outside [0, {m - 1}]")
    if summary is None or summary.k < k1_max + 1:
        summary = truncated_svd(X, k1_max + 1, tol=tol, max_iter=max_iter)
    sigma = np.asarray(summary.sigma)
    if sigma[0] == 0:
        raise NumericError("stable rank undefined for a zero matrix")
    curve = []
    for k1 in range(k1_max + 1):
        tail = summary.frob_sq * (1.0 - explained_variance(summary, k1))
        s_next = sigma[k1]
        if k1 > 0 and (s_next <= _RANK_CUTOFF * sigma[0] or tail <= 1e-12 * summary.frob_sq):
            warnings.warn(f"residual is numerically zero at k1={k1}; curve truncated", RuntimeWarning, stacklevel=2)
            break
        curve.append((k1, stable_rank(max(tail, s_next**2), float(s_next))))
    return curve

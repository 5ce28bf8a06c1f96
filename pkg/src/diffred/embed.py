"""DiffRed embeddings, the PCA and random-map baselines, and bound-driven
choice of ``(k1, k2)``."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import metrics
from .data import DataMatrix, as_array
from .errors import ConfigError, NumericError
from .projection import monte_carlo_best, project, sample_map
from .rng import Purpose, RandomStream
from .spectral import DEFAULT_MAX_ITER, DEFAULT_TOL, SpectralSummary, explained_variance, truncated_svd

# residual energy below this fraction of the total counts as zero
_ZERO_RESIDUAL = 1e-20


@dataclass(frozen=True)
class DiffRedConfig:
    k1: int
    k2: int
    eta: int = 100
    seed: int = 0
    svd_tol: float = DEFAULT_TOL
    svd_max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        if self.k1 < 0:
            raise ConfigError("k1 must be nonnegative")
        if self.k2 < 0 or (self.k2 == 0 and self.k1 == 0):
            raise ConfigError("k2 must be at least 1 unless k1 >= 1")
        if self.eta < 1:
            raise ConfigError("eta must be at least 1")
        if not self.svd_tol > 0 or self.svd_max_iter < 1:
            raise ConfigError("svd_tol must be positive and svd_max_iter at least 1")

    @property
    def d(self) -> int:
        return self.k1 + self.k2

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EmbeddingMatrix:
    values: np.ndarray
    method: str
    params: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ConfigError("embedding must be 2-D")
        if not np.all(np.isfinite(values)):
            raise NumericError("embedding has non-finite entries")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


@dataclass(frozen=True)
class HyperparameterChoice:
    k1: int
    k2: int
    p: float
    bound_value: float
    scan: tuple


def stress_bound(p: float, k2: int) -> float:
    """``sqrt((1 - p) / k2)``."""
    return math.sqrt(max(0.0, 1.0 - p) / k2)


def _check_dims(X, d):
    m = min(X.shape)
    if not 1 <= d <= m:
        raise ConfigError(f"target dimension {d} outside [1, {m}] for a {X.shape[0]}x{X.shape[1]} matrix")


def _warn_if_uncentered(A, X):
    if isinstance(A, DataMatrix) and A.column_centered:
        return
    scale = max(1.0, float(np.sqrt(np.mean(X * X))))
    if np.max(np.abs(X.mean(axis=0))) > 1e-8 * scale:
        warnings.warn("input is not column-centered; the Stress guarantees assume centered data", stacklevel=3)


def select_hyperparameters(summary: SpectralSummary, d: int) -> HyperparameterChoice:
    """Pick ``(k1, d - k1)`` minimizing ``sqrt((1 - p(k1)) / k2)``.

    Every ``k1`` in ``0 .. d-1`` is scanned; ties go to the smaller ``k1``.
    """
    if d < 1:
        raise ConfigError("d must be at least 1")
    if summary.k < d:
        raise ConfigError(f"spectral summary has k={summary.k} components, need at least d={d}")
    scan = []
    for k1 in range(d):
        k2 = d - k1
        p = explained_variance(summary, k1)
        scan.append((k1, k2, p, stress_bound(p, k2)))
    best = min(scan, key=lambda row: (row[3], row[0]))
    return HyperparameterChoice(k1=best[0], k2=best[1], p=best[2], bound_value=best[3], scan=tuple(scan))


def diffred_embed(A, cfg: DiffRedConfig, summary: SpectralSummary | None = None, threads=1) -> EmbeddingMatrix:
    """Map ``A`` to ``[A V_k1 | best-of-eta Gaussian projection of the residual]``.

    ``summary`` may be passed to reuse a decomposition with at least ``k1``
    components. The random part draws iteration ``i`` from stream
    ``(cfg.seed, GAUSSIAN_MAP, i)``.
    """
    X = as_array(A)
    _check_dims(X, cfg.d)
    _warn_if_uncentered(A, X)
    k1, k2 = cfg.k1, cfg.k2
    provenance = {"seed": cfg.seed, "purpose": Purpose.GAUSSIAN_MAP.name, "p": 0.0}
    parts = []
    A_star = X
    if k1 > 0:
        if summary is None or summary.k < k1:
            summary = truncated_svd(X, k1, tol=cfg.svd_tol, max_iter=cfg.svd_max_iter)
        Vk = summary.V[:, :k1]
        Z = X @ Vk
        parts.append(Z)
        A_star = X - Z @ Vk.T
        provenance["p"] = explained_variance(summary, k1)
        provenance["svd_converged"] = summary.converged
        provenance["svd_iterations"] = summary.iterations_used
        if not summary.converged:
            warnings.warn("SVD did not converge; embedding uses the best estimate", RuntimeWarning, stacklevel=2)
    if k2 > 0:
        total = float(np.sum(X * X))
        if float(np.sum(A_star * A_star)) <= _ZERO_RESIDUAL * total:
            warnings.warn(f"residual is zero after k1={k1} components; random block filled with zeros", RuntimeWarning, stacklevel=2)
            parts.append(np.zeros((X.shape[0], k2)))
            provenance["warnings"] = ["zero_residual"]
        else:
            mc = monte_carlo_best(A_star, k2, cfg.eta, RandomStream(cfg.seed, Purpose.GAUSSIAN_MAP, 0), threads=threads)
            parts.append(mc.T_min)
            provenance["stream_indices"] = [0, cfg.eta - 1]
            provenance["iteration_of_min"] = mc.iteration_of_min
            provenance["residual_m1"] = mc.m1_min
    provenance["bound_value"] = stress_bound(provenance["p"], k2) if k2 > 0 else 0.0
    values = np.hstack(parts) if len(parts) > 1 else np.array(parts[0])
    return EmbeddingMatrix(values, "diffred", params=cfg.to_dict(), provenance=provenance)


def auto_config(A, d: int, eta: int = 100, seed: int = 0, svd_tol=DEFAULT_TOL, svd_max_iter=DEFAULT_MAX_ITER):
    """Bound-optimal :class:`DiffRedConfig` for target dimension ``d``.

    Returns ``(config, choice, summary)``; the summary can be handed to
    :func:`diffred_embed` to avoid a second decomposition.
    """
    X = as_array(A)
    _check_dims(X, d)
    summary = truncated_svd(X, d, tol=svd_tol, max_iter=svd_max_iter)
    choice = select_hyperparameters(summary, d)
    cfg = DiffRedConfig(choice.k1, choice.k2, eta=eta, seed=seed, svd_tol=svd_tol, svd_max_iter=svd_max_iter)
    return cfg, choice, summary


def pca_embed(A, d: int, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER, summary=None) -> EmbeddingMatrix:
    X = as_array(A)
    _check_dims(X, d)
    if summary is None or summary.k < d:
        summary = truncated_svd(X, d, tol=tol, max_iter=max_iter)
    values = X @ summary.V[:, :d]
    return EmbeddingMatrix(
        values,
        "pca",
        params={"d": d, "svd_tol": tol, "svd_max_iter": max_iter},
        provenance={"p": explained_variance(summary, d), "svd_converged": summary.converged},
    )


def _normal_ci(values):
    values = np.asarray(values, dtype=np.float64)
    mean = float(values.mean())
    if values.size < 2:
        return mean, None
    half = 1.96 * float(values.std(ddof=1)) / math.sqrt(values.size)
    return mean, (mean - half, mean + half)


@dataclass(frozen=True)
class RMapResult:
    """Per-replica metrics of ``alpha`` independent random maps.

    Confidence intervals use the normal approximation (1.96 standard errors)
    and are ``None`` for a single replica.
    """

    embeddings: tuple
    m1: np.ndarray
    stress: np.ndarray
    m1_mean: float
    m1_ci: tuple | None
    stress_mean: float
    stress_ci: tuple | None


def rmap_embed(A, d: int, alpha: int = 20, seed: int = 0, stress_mode: str = "exact", threads: int = 1) -> RMapResult:
    """Apply ``alpha`` independent Gaussian maps to ``A`` and score each one.

    Replica ``i`` uses stream ``(seed, GAUSSIAN_MAP, i)``, the same stream the
    ``i``-th Monte-Carlo iteration of :func:`diffred_embed` would use.
    """
    X = as_array(A)
    if d < 1 or alpha < 1:
        raise ConfigError("d and alpha must be at least 1")
    if d > X.shape[1]:
        raise ConfigError(f"target dimension {d} exceeds source dimension {X.shape[1]}")
    embeddings, m1s, stresses = [], [], []
    for i in range(alpha):
        stream = RandomStream(seed, Purpose.GAUSSIAN_MAP, i)
        T = project(X, sample_map(X.shape[1], d, stream))
        embeddings.append(
            EmbeddingMatrix(T, "rmap", params={"d": d, "alpha": alpha, "seed": seed}, provenance={"stream_index": i})
        )
        m1s.append(metrics.m1(X, T))
        stresses.append(
            metrics.stress(X, T, mode=stress_mode, stream=RandomStream(seed, Purpose.PAIR_SAMPLE, i), threads=threads)
        )
    m1_mean, m1_ci = _normal_ci(m1s)
    s_mean, s_ci = _normal_ci(stresses)
    return RMapResult(tuple(embeddings), np.array(m1s), np.array(stresses), m1_mean, m1_ci, s_mean, s_ci)


def energy_match(embedding, A) -> EmbeddingMatrix:
    """Rescale ``embedding`` so its Frobenius norm equals that of ``A``."""
    Y = as_array(embedding.values if isinstance(embedding, EmbeddingMatrix) else embedding)
    X = as_array(A)
    if Y.shape[0] != X.shape[0]:
        raise ConfigError(f"row counts differ: {X.shape[0]} vs {Y.shape[0]}")
    norm_y = float(np.linalg.norm(Y))
    if norm_y == 0:
        raise NumericError("cannot energy-match a zero embedding")
    scale = float(np.linalg.norm(X)) / norm_y
    if isinstance(embedding, EmbeddingMatrix):
        method, params, prov = embedding.method, dict(embedding.params), dict(embedding.provenance)
    else:
        method, params, prov = "external", {}, {}
    prov["energy_match_scale"] = scale
    return EmbeddingMatrix(Y * scale, method, params=params, provenance=prov)

"""Distortion metrics: M1 (energy distortion) and Stress, plus the identities
they rest on."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .data import as_array
from .errors import ConfigError, NumericError
from .rng import Purpose, RandomStream

_BLOCK_PAIRS = 1 << 22


def m1_signed(A, A_tilde) -> float:
    """``1 - ||A_tilde||_F^2 / ||A||_F^2`` (positive when energy is lost)."""
    X, Y = as_array(A), as_array(A_tilde)
    if X.shape[0] != Y.shape[0]:
        raise ConfigError(f"row counts differ: {X.shape[0]} vs {Y.shape[0]}")
    energy = float(np.sum(X * X))
    if energy == 0:
        raise NumericError("M1 undefined: original matrix has zero energy")
    return 1.0 - float(np.sum(Y * Y)) / energy


def m1(A, A_tilde) -> float:
    return abs(m1_signed(A, A_tilde))


def _row_blocks(n: int):
    rows = max(1, _BLOCK_PAIRS // max(n, 1))
    return [(a, min(a + rows, n - 1)) for a in range(0, n - 1, rows)]


def _block_sums(X, Y, a, b):
    num_parts, den_parts = [], []
    for i in range(a, b):
        d_hi = cdist(X[i : i + 1], X[i + 1 :])[0]
        d_lo = cdist(Y[i : i + 1], Y[i + 1 :])[0]
        num_parts.append(np.sum((d_hi - d_lo) ** 2))
        den_parts.append(np.sum(d_hi**2))
    return math.fsum(num_parts), math.fsum(den_parts)


def stress_terms(A, A_tilde, threads: int = 1):
    """Return ``(sum (d_ij - d~_ij)^2, sum d_ij^2)`` over unordered pairs.

    Rows are partitioned into blocks; block partial sums are merged in block
    order with ``math.fsum`` so the result does not depend on ``threads``.
    """
    X, Y = as_array(A), as_array(A_tilde)
    if X.shape[0] != Y.shape[0]:
        raise ConfigError(f"row counts differ: {X.shape[0]} vs {Y.shape[0]}")
    n = X.shape[0]
    if n < 2:
        raise ConfigError("stress needs at least two points")
    blocks = _row_blocks(n)
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ab: _block_sums(X, Y, *ab), blocks))
    else:
        parts = [_block_sums(X, Y, a, b) for a, b in blocks]
    return math.fsum(p[0] for p in parts), math.fsum(p[1] for p in parts)


def stress_exact(A, A_tilde, threads: int = 1) -> float:
    """Normalized RMS error of pairwise Euclidean distances, ``O(n^2)``."""
    num, den = stress_terms(A, A_tilde, threads=threads)
    if den == 0:
        raise NumericError("stress undefined: all original points coincide")
    return math.sqrt(num / den)


def stress_sampled(A, A_tilde, pair_count: int, stream: RandomStream | None = None, exhaustive_fallback: bool = True):
    """Estimate Stress from ``pair_count`` uniformly drawn unordered pairs.

    The estimate is the ratio of the two sampled sums (not a mean of ratios).
    Its standard error comes from the delta method applied to the sample
    means of the numerator and denominator terms.

    Returns
    -------
    estimate, standard_error : float
        When ``exhaustive_fallback`` is set and ``pair_count`` covers every
        pair, the exact value is returned with standard error 0.
    """
    X, Y = as_array(A), as_array(A_tilde)
    if X.shape[0] != Y.shape[0]:
        raise ConfigError(f"row counts differ: {X.shape[0]} vs {Y.shape[0]}")
    if pair_count < 100:
        raise ConfigError("pair_count must be at least 100")
    n = X.shape[0]
    if exhaustive_fallback and pair_count >= n * (n - 1) // 2:
        return stress_exact(X, Y), 0.0
    if stream is None:
        stream = RandomStream(0, Purpose.PAIR_SAMPLE, 0)
    gen = stream.generator()
    i = gen.integers(0, n, size=pair_count)
    j = gen.integers(0, n - 1, size=pair_count)
    j += j >= i
    d_hi = np.linalg.norm(X[i] - X[j], axis=1)
    d_lo = np.linalg.norm(Y[i] - Y[j], axis=1)
    num = (d_hi - d_lo) ** 2
    den = d_hi**2
    mean_den = den.mean()
    if mean_den == 0:
        raise NumericError("degenerate sample: every sampled original distance is zero")
    ratio = num.mean() / mean_den
    cov = np.cov(np.vstack([num, den]), ddof=1)
    var_ratio = (cov[0, 0] - 2 * ratio * cov[0, 1] + ratio**2 * cov[1, 1]) / (pair_count * mean_den**2)
    estimate = math.sqrt(ratio)
    if estimate == 0:
        return 0.0, 0.0
    se = math.sqrt(max(var_ratio, 0.0)) / (2 * estimate)
    return estimate, se


def pairwise_energy_identity_check(A):
    """Compare ``sum_{j<i} ||x_i - x_j||^2`` with ``n ||A||_F^2``.

    The two agree for column-centered data. Returns
    ``(lhs, rhs, relative_gap)`` with ``relative_gap = |lhs - rhs| / rhs``.
    """
    X = as_array(A)
    n = X.shape[0]
    parts = []
    for i in range(1, n):
        diff = X[:i] - X[i]
        parts.append(np.sum(diff * diff))
    lhs = math.fsum(parts)
    rhs = n * math.fsum(np.sum(X * X, axis=1))
    gap = abs(lhs - rhs) / rhs if rhs else abs(lhs)
    return lhs, rhs, gap


def triangle_bound_check(a: float, b: float, c: float) -> bool:
    """``(sqrt(a^2+b^2) - sqrt(a^2+c^2))^2 <= (b-c)^2`` up to 1e-12."""
    if min(a, b, c) < 0:
        raise ConfigError("arguments must be nonnegative")
    lhs = (math.hypot(a, b) - math.hypot(a, c)) ** 2
    return lhs <= (b - c) ** 2 + 1e-12


def beta_sensitivity(grid) -> float:
    """Average over target dimensions of the population variance of M1
    across the ``(k1, k2)`` cells at that dimension.

    ``grid`` is an iterable of ``(d, k1, k2, m1)`` tuples.
    """
    by_d: dict = {}
    for d, _k1, _k2, value in grid:
        by_d.setdefault(int(d), []).append(float(value))
    if not by_d:
        raise ConfigError("empty grid")
    for d, vals in by_d.items():
        if len(vals) < 2:
            raise ConfigError(f"need at least two (k1, k2) cells at d={d}")
    return float(np.mean([np.var(vals) for vals in by_d.values()]))


@dataclass
class MetricReport:
    m1: float
    stress: float
    stress_mode: str = "exact"
    bound_value: float | None = None
    wall_time_ms: float = 0.0
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "m1": self.m1,
            "stress": self.stress,
            "stress_mode": self.stress_mode,
            "bound_value": self.bound_value,
            "wall_time_ms": self.wall_time_ms,
            "provenance": self.provenance,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def parse_stress_mode(mode: str):
    """``"exact"`` -> ``None``; ``"sampled:N"`` -> ``N``."""
    if mode == "exact":
        return None
    if mode.startswith("sampled:"):
        try:
            count = int(mode.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad stress mode {mode!r}") from None
        if count < 100:
            raise ConfigError("sampled stress needs at least 100 pairs")
        return count
    raise ConfigError(f"bad stress mode {mode!r}; expected 'exact' or 'sampled:N'")


def stress(A, A_tilde, mode: str = "exact", stream: RandomStream | None = None, threads: int = 1) -> float:
    """Exact or sampled Stress selected by a mode string."""
    count = parse_stress_mode(mode)
    if count is None:
        return stress_exact(A, A_tilde, threads=threads)
    return stress_sampled(A, A_tilde, count, stream=stream)[0]

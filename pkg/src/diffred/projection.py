"""Gaussian random maps and best-of-eta Monte-Carlo selection."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import as_array
from .errors import ConfigError, NumericError
from .rng import Purpose, RandomStream


@dataclass(frozen=True)
class GaussianMap:
    """``D x k2`` matrix of N(0, 1) draws scaled by ``1/sqrt(k2)``."""

    values: np.ndarray
    stream: RandomStream

    @property
    def D(self) -> int:
        return self.values.shape[0]

    @property
    def k2(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class MonteCarloResult:
    T_min: np.ndarray
    m1_min: float
    iteration_of_min: int
    m1_per_iteration: np.ndarray


def resolve_threads(threads=None) -> int:
    """Thread count from an explicit value, ``$DIFFRED_THREADS`` or the CPU count."""
    if threads in (None, "auto"):
        env = os.environ.get("DIFFRED_THREADS")
        threads = env if env not in (None, "", "auto") else os.cpu_count() or 1
    try:
        threads = int(threads)
    except (TypeError, ValueError):
        raise ConfigError(f"bad thread count {threads!r}") from None
    if threads < 1:
        raise ConfigError("thread count must be at least 1")
    return threads


def sample_map(D: int, k2: int, stream: RandomStream) -> GaussianMap:
    if D < 1 or k2 < 1:
        raise ConfigError(f"map shape must be positive, got {D}x{k2}")
    G = stream.gaussian(D * k2).reshape(D, k2)
    G /= np.sqrt(k2)
    G.setflags(write=False)
    return GaussianMap(G, stream)


def project(A, G) -> np.ndarray:
    X = as_array(A)
    Gv = G.values if isinstance(G, GaussianMap) else np.asarray(G, dtype=np.float64)
    if X.shape[1] != Gv.shape[0]:
        raise ConfigError(f"cannot project {X.shape[1]}-column data with a {Gv.shape[0]}-row map")
    return X @ Gv


def _m1_trace(X, energy, k2, stream, indices):
    out = np.empty(len(indices))
    for pos, i in enumerate(indices):
        T = project(X, sample_map(X.shape[1], k2, stream.child(i)))
        out[pos] = abs(1.0 - float(np.sum(T * T)) / energy)
    return out


def monte_carlo_best(A_star, k2: int, eta: int = 100, master: RandomStream | None = None, threads=1) -> MonteCarloResult:
    """Draw ``eta`` maps and keep the projection of ``A_star`` with least M1.

    Iteration ``i`` uses ``master.child(i)``. Workers only return the scalar
    M1 trace; the winning projection is recomputed from its stream afterwards,
    so the result is identical for every thread count. Ties go to the first
    index.
    """
    X = as_array(A_star)
    if eta < 1:
        raise ConfigError("eta must be at least 1")
    if k2 < 1:
        raise ConfigError("k2 must be at least 1")
    if master is None:
        master = RandomStream(0, Purpose.GAUSSIAN_MAP, 0)
    energy = float(np.sum(X * X))
    if energy == 0:
        raise NumericError("zero residual: M1 undefined, skip the random component")
    threads = min(resolve_threads(threads), eta)
    if threads == 1:
        trace = _m1_trace(X, energy, k2, master, range(eta))
    else:
        chunks = [c for c in np.array_split(np.arange(eta), threads) if c.size]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda idx: _m1_trace(X, energy, k2, master, idx), chunks))
        trace = np.concatenate(parts)
    best = int(np.argmin(trace))
    T_min = project(X, sample_map(X.shape[1], k2, master.child(best)))
    trace.setflags(write=False)
    return MonteCarloResult(T_min=T_min, m1_min=float(trace[best]), iteration_of_min=best, m1_per_iteration=trace)

"""Grid search over ``(k1, k2)`` and empirical checks of the distortion bounds."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import metrics
from .data import as_array
from .embed import DiffRedConfig, diffred_embed, select_hyperparameters, stress_bound
from .errors import ConfigError
from .rng import Purpose, RandomStream
from .spectral import DEFAULT_MAX_ITER, DEFAULT_TOL, explained_variance, stable_rank, truncated_svd

# 2-norm stress constant for a pure Gaussian map holding with probability >= 1/2
STRESS_CONSTANT = 6.2

GRID_COLUMNS = ("d", "k1", "k2", "p", "bound", "m1", "stress", "wall_time_ms", "bound_optimal", "stress_optimal")


@dataclass(frozen=True)
class GridRow:
    k1: int
    k2: int
    p: float
    bound: float
    m1: float
    stress: float
    wall_time_ms: float


@dataclass(frozen=True)
class GridReport:
    d: int
    rows: tuple
    bound_optimal: int
    stress_optimal: int

    def records(self):
        for i, r in enumerate(self.rows):
            yield (self.d, r.k1, r.k2, r.p, r.bound, r.m1, r.stress, r.wall_time_ms,
                   int(i == self.bound_optimal), int(i == self.stress_optimal))

    @property
    def stress_gap(self) -> float:
        """Relative excess Stress of the bound-optimal cell over the grid minimum."""
        best = self.rows[self.stress_optimal].stress
        chosen = self.rows[self.bound_optimal].stress
        return (chosen - best) / best if best > 0 else 0.0


def stress_theorem_bound(p: float, k2: int) -> float:
    """``6.2 * sqrt(2 (1 - p) / k2)``, the q = 2 Stress bound for DiffRed."""
    return STRESS_CONSTANT * math.sqrt(2.0 * max(0.0, 1.0 - p) / k2)


def m1_epsilon(p: float, k2: int, rho_residual: float, eta: int, delta: float = 0.05, c1: float = 0.125) -> float:
    """M1 level exceeded with probability at most ``delta`` after ``eta`` iterations.

    Solves ``delta = exp(-eta (c1 eps^2 k2 rho / (1-p)^2 - ln 2))`` for ``eps``.
    The absolute constant ``c1`` is not pinned by the theory; 1/8 is the
    classical chi-square concentration constant.
    """
    if not 0 < delta < 1:
        raise ConfigError("delta must lie in (0, 1)")
    return (1.0 - p) * math.sqrt((math.log(1.0 / delta) / eta + math.log(2.0)) / (c1 * k2 * rho_residual))


def grid_search(A, d_list, eta: int = 100, seed: int = 0, stress_mode: str = "exact", threads: int = 1,
                svd_tol: float = DEFAULT_TOL, svd_max_iter: int = DEFAULT_MAX_ITER, summary=None):
    """Evaluate every ``(k1, d - k1)`` cell with ``k2 >= 1`` for each ``d``.

    Returns ``(reports, beta)`` where ``beta`` is the M1 sensitivity over the
    whole grid (``nan`` if some ``d`` has a single cell).
    """
    X = as_array(A)
    d_list = [int(d) for d in d_list]
    if not d_list:
        raise ConfigError("no target dimensions given")
    m = min(X.shape)
    for d in d_list:
        if not 1 <= d <= m:
            raise ConfigError(f"target dimension {d} outside [1, {m}]")
    d_max = max(d_list)
    if summary is None or summary.k < d_max:
        summary = truncated_svd(X, d_max, tol=svd_tol, max_iter=svd_max_iter)
    reports = []
    beta_cells = []
    for d in d_list:
        rows = []
        for k1 in range(d):
            k2 = d - k1
            cfg = DiffRedConfig(k1, k2, eta=eta, seed=seed, svd_tol=svd_tol, svd_max_iter=svd_max_iter)
            t0 = time.perf_counter()
            emb = diffred_embed(X, cfg, summary=summary, threads=threads)
            elapsed = 1e3 * (time.perf_counter() - t0)
            p = explained_variance(summary, k1)
            m1_val = metrics.m1(X, emb.values)
            s_val = metrics.stress(X, emb.values, mode=stress_mode,
                                   stream=RandomStream(seed, Purpose.PAIR_SAMPLE, 0), threads=threads)
            rows.append(GridRow(k1, k2, p, stress_bound(p, k2), m1_val, s_val, elapsed))
            beta_cells.append((d, k1, k2, m1_val))
        choice = select_hyperparameters(summary, d)
        stresses = [r.stress for r in rows]
        reports.append(GridReport(d, tuple(rows), bound_optimal=choice.k1, stress_optimal=int(np.argmin(stresses))))
    try:
        beta = metrics.beta_sensitivity(beta_cells)
    except ConfigError:
        beta = float("nan")
    return reports, beta


@dataclass(frozen=True)
class ValidationReport:
    d: int
    k1: int
    k2: int
    p: float
    trials: int
    stress_bound: float
    stress_fraction: float
    m1_epsilon: float
    m1_fraction: float
    grid_gap: float
    stress_values: tuple
    m1_values: tuple

    def to_dict(self) -> dict:
        return {
            "d": self.d, "k1": self.k1, "k2": self.k2, "p": self.p, "trials": self.trials,
            "stress_bound": self.stress_bound, "stress_fraction": self.stress_fraction,
            "m1_epsilon": self.m1_epsilon, "m1_fraction": self.m1_fraction, "grid_gap": self.grid_gap,
        }


def validate_bounds(A, d: int, trials: int = 100, seed: int = 0, eta: int = 100, k1=None, k2=None,
                    stress_mode: str = "exact", delta: float = 0.05, threads: int = 1,
                    svd_tol: float = DEFAULT_TOL, svd_max_iter: int = DEFAULT_MAX_ITER) -> ValidationReport:
    """Run ``trials`` independent DiffRed embeddings and score them against the bounds.

    Trial ``t`` uses master seed ``seed + t``. ``(k1, k2)`` default to the
    bound-optimal split of ``d``. The grid gap is measured on one grid search
    at ``seed``.
    """
    if trials < 10:
        raise ConfigError("validation needs at least 10 trials")
    X = as_array(A)
    summary = truncated_svd(X, min(d + 1, min(X.shape)), tol=svd_tol, max_iter=svd_max_iter)
    if k1 is None or k2 is None:
        choice = select_hyperparameters(summary, d)
        k1, k2 = choice.k1, choice.k2
    if k1 + k2 != d:
        raise ConfigError("k1 + k2 must equal d")
    p = explained_variance(summary, k1)
    s_bound = stress_theorem_bound(p, k2)
    residual_energy = summary.frob_sq * (1.0 - p)
    sigma_next = float(summary.sigma[k1]) if k1 < summary.k else 0.0
    if sigma_next > 0:
        rho_star = stable_rank(max(residual_energy, sigma_next**2), sigma_next)
        eps = m1_epsilon(p, k2, rho_star, eta, delta=delta)
    else:
        eps = float("inf")
    stresses, m1s = [], []
    for t in range(trials):
        cfg = DiffRedConfig(k1, k2, eta=eta, seed=seed + t, svd_tol=svd_tol, svd_max_iter=svd_max_iter)
        emb = diffred_embed(X, cfg, summary=summary, threads=threads)
        m1s.append(metrics.m1(X, emb.values))
        stresses.append(metrics.stress(X, emb.values, mode=stress_mode,
                                       stream=RandomStream(seed + t, Purpose.PAIR_SAMPLE, 0), threads=threads))
    reports, _ = grid_search(X, [d], eta=eta, seed=seed, stress_mode=stress_mode, threads=threads,
                             svd_tol=svd_tol, svd_max_iter=svd_max_iter, summary=summary)
    stresses, m1s = np.array(stresses), np.array(m1s)
    return ValidationReport(
        d=d, k1=k1, k2=k2, p=p, trials=trials,
        stress_bound=s_bound, stress_fraction=float(np.mean(stresses <= s_bound)),
        m1_epsilon=eps, m1_fraction=float(np.mean(m1s <= eps)),
        grid_gap=reports[0].stress_gap,
        stress_values=tuple(stresses.tolist()), m1_values=tuple(m1s.tolist()),
    )

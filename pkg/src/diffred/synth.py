"""Synthetic matrices with a prescribed singular spectrum."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataMatrix
from .errors import ConfigError
from .rng import Purpose, RandomStream


@dataclass(frozen=True)
class SpectrumProfile:
    """Target singular values, nonincreasing, at least one positive."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in np.atleast_1d(self.values))
        if not vals:
            raise ConfigError("spectrum profile is empty")
        if any(v < 0 or not np.isfinite(v) for v in vals):
            raise ConfigError("singular values must be finite and nonnegative")
        if any(a < b for a, b in zip(vals, vals[1:])):
            raise ConfigError("spectrum profile must be nonincreasing")
        if vals[0] <= 0:
            raise ConfigError("spectrum profile needs a positive entry")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    @property
    def energy(self) -> float:
        return float(np.sum(np.square(self.values)))

    @property
    def stable_rank(self) -> float:
        return self.energy / self.values[0] ** 2

    @classmethod
    def equal(cls, r: int, value: float = 1.0) -> "SpectrumProfile":
        """``r`` equal spikes; stable rank exactly ``r``."""
        return cls((value,) * r)

    @classmethod
    def spiked(cls, spikes, bulk: int, bulk_value: float = 1.0) -> "SpectrumProfile":
        """Large ``spikes`` on top of ``bulk`` equal values."""
        return cls(tuple(np.atleast_1d(spikes)) + (bulk_value,) * bulk)


def _orthonormal(G: np.ndarray) -> np.ndarray:
    Q, R = np.linalg.qr(G)
    # fix column signs so the factor is a deterministic function of G
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)


def synth_spiked(n: int, D: int, profile, stream: RandomStream | None = None, centered: bool = False) -> DataMatrix:
    """Build ``A = U diag(profile) V^T`` with random orthonormal ``U``, ``V``.

    With ``centered=True`` the left factor is also orthogonal to the all-ones
    vector, so the columns of ``A`` have zero mean and the spectrum is still
    exact. That needs ``len(profile) <= n - 1``.
    """
    if not isinstance(profile, SpectrumProfile):
        profile = SpectrumProfile(tuple(profile))
    if stream is None:
        stream = RandomStream(0, Purpose.SYNTH_DATA, 0)
    r = len(profile)
    if r > min(n, D):
        raise ConfigError(f"profile of length {r} does not fit a {n}x{D} matrix")
    if centered and r > n - 1:
        raise ConfigError(f"centered synthesis needs len(profile) <= n - 1 = {n - 1}")
    draws = stream.gaussian(n * r + D * r)
    Gu = draws[: n * r].reshape(n, r)
    Gv = draws[n * r :].reshape(D, r)
    if centered:
        ones = np.full((n, 1), 1.0 / np.sqrt(n))
        U = _orthonormal(np.hstack([ones, Gu]))[:, 1:]
    else:
        U = _orthonormal(Gu)
    V = _orthonormal(Gv)
    A = (U * np.asarray(profile.values)) @ V.T
    if centered:
        A -= A.mean(axis=0)
        return DataMatrix(A, column_centered=True, history=("synth_centered",))
    return DataMatrix(A, history=("synth",))

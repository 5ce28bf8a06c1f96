"""Seeded, counter-based random streams.

A stream is addressed by ``(master_seed, purpose, stream_index)``. The
master seed and the stream index form the 128-bit Philox key, the purpose
occupies a high word of the counter, so every address owns a disjoint
sequence and draws never depend on the order in which streams are used.
That is what lets Monte-Carlo iterations run on any number of threads and
still reproduce the serial result exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

_MASK64 = (1 << 64) - 1


class Purpose(enum.IntEnum):
    GAUSSIAN_MAP = 1
    SYNTH_DATA = 2
    SVD_INIT = 3
    PAIR_SAMPLE = 4


@dataclass(frozen=True)
class RandomStream:
    master_seed: int = 0
    purpose: Purpose = Purpose.GAUSSIAN_MAP
    stream_index: int = 0

    def __post_init__(self):
        if not (0 <= int(self.master_seed) <= _MASK64):
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")
        if not (0 <= int(self.stream_index) <= _MASK64):
            raise ValueError("stream_index must fit in an unsigned 64-bit integer")
        object.__setattr__(self, "purpose", Purpose(self.purpose))

    def child(self, index: int) -> "RandomStream":
        """Same seed and purpose, different stream index."""
        return replace(self, stream_index=index)

    def bit_generator(self) -> np.random.Philox:
        key = np.array([self.master_seed, self.stream_index], dtype=np.uint64)
        counter = np.array([0, 0, int(self.purpose), 0], dtype=np.uint64)
        return np.random.Philox(key=key, counter=counter)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(self.bit_generator())

    def uniform(self, count: int) -> np.ndarray:
        """``count`` uniforms on the open interval (0, 1]."""
        return 1.0 - self.generator().random(count)

    def gaussian(self, count: int) -> np.ndarray:
        return gaussian_draw(self, count)


def gaussian_draw(stream: RandomStream, count: int) -> np.ndarray:
    """Draw ``count`` i.i.d. standard normals with the Box-Muller transform.

    Uniforms come from the stream's Philox generator; pairs ``(u1, u2)`` map to
    ``sqrt(-2 ln u1) * (cos 2 pi u2, sin 2 pi u2)``, interleaved.
    """
    count = int(count)
    if count < 0:
        raise ValueError("count must be nonnegative")
    n_pairs = (count + 1) // 2
    u = stream.uniform(2 * n_pairs).reshape(n_pairs, 2)
    radius = np.sqrt(-2.0 * np.log(u[:, 0]))
    theta = 2.0 * np.pi * u[:, 1]
    out = np.empty((n_pairs, 2))
    out[:, 0] = radius * np.cos(theta)
    out[:, 1] = radius * np.sin(theta)
    return out.reshape(-1)[:count]

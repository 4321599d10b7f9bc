"""Deterministic, seedable random sources with independent substreams.

Every stream is a Philox counter-based generator keyed by the pair
(seed, stream_id), so identical pairs reproduce identical sequences on any
platform and distinct stream_ids are statistically independent.  Run code
assigns one stream per iteration for direction/radius draws and a partner
stream (offset by ``NOISE_STREAM_OFFSET``) for oracle noise, which keeps
noise independent of the estimator's geometry draws.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDimensionError

__all__ = [
    "NOISE_STREAM_OFFSET",
    "RandomStream",
    "sample_sphere",
    "sample_radius",
]

# Noise substreams live in a disjoint id range from geometry substreams.
NOISE_STREAM_OFFSET = 1 << 62


@dataclass
class RandomStream:
    """A single independent Philox substream."""

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator | None = field(default=None, repr=False)
    _partner: "RandomStream | None" = field(default=None, repr=False)

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            seq = np.random.SeedSequence(entropy=(int(self.seed), int(self.stream_id)))
            self._gen = np.random.Generator(np.random.Philox(seed=seq))
        return self._gen

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)

    def sphere(self, dim: int, size=None):
        return sample_sphere(dim, self, size=size)

    def radius(self, size=None):
        return sample_radius(self, size=size)

    def noise_partner(self) -> "RandomStream":
        """Paired stream for noise draws; cached so repeated use continues it."""
        if self._partner is None:
            self._partner = RandomStream(self.seed, self.stream_id + NOISE_STREAM_OFFSET)
        return self._partner


def sample_sphere(dim: int, stream: RandomStream, size=None):
    """Uniform draw(s) from the unit sphere in R^dim via normalized Gaussians.

    Returns shape (dim,) for size=None, else (size, dim).
    """
    if dim < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {dim}")
    n = 1 if size is None else int(size)
    g = stream.standard_normal((n, dim))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # A zero draw has probability zero; guard keeps the output well-defined.
    norms[norms == 0.0] = 1.0
    e = g / norms
    return e[0] if size is None else e


def sample_radius(stream: RandomStream, size=None):
    """Uniform draw(s) from [-1, 1]."""
    return stream.uniform(-1.0, 1.0, size)

"""Seeded synthetic token manifolds: clustered Gaussian blobs plus uniform
random importance.

Real encoder features cluster by semantics; these fixtures reproduce that
shape cheaply and reproducibly. The generator is pinned to the Philox
counter-based bit generator (via ``numpy.random.Philox`` seeded through
``SeedSequence(rng_seed)``) so equal specs give bit-equal outputs across
platforms; tests carry frozen draw vectors guarding that contract.

Draw order (fixed):
  1. cluster centers, standard normal (n_clusters, dim), unit-normalized
     then scaled by center_scale;
  2. cluster labels, uniform integers in [0, n_clusters);
  3. per-token noise, standard normal (n_tokens, dim);
  4. importance, uniform in (0, 1);
  5. any regeneration redraws for zero-norm rows, in row order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from .core import FeatureMatrix
from .errors import ValidationError


@dataclass(frozen=True)
class ManifoldSpec:
    n_tokens: int
    dim: int
    n_clusters: int = 1
    cluster_spread: float = 0.35
    center_scale: float = 1.0
    non_negative: bool = False
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_tokens < 1:
            raise ValidationError(f"n_tokens must be >= 1, got {self.n_tokens}")
        if self.dim < 1:
            raise ValidationError(f"dim must be >= 1, got {self.dim}")
        if not 1 <= self.n_clusters <= self.n_tokens:
            raise ValidationError(
                f"n_clusters must be in [1, n_tokens={self.n_tokens}], got {self.n_clusters}"
            )
        if self.cluster_spread <= 0.0:
            raise ValidationError(f"cluster_spread must be > 0, got {self.cluster_spread}")
        if self.center_scale <= 0.0:
            raise ValidationError(f"center_scale must be > 0, got {self.center_scale}")
        if self.rng_seed < 0:
            raise ValidationError(f"rng_seed must be unsigned, got {self.rng_seed}")


@dataclass(frozen=True)
class Manifold:
    """Generated fixture: features, raw importance, cluster labels.

    ``regenerated_rows`` counts rows that had to be redrawn because they
    came out with zero norm (practically always 0).
    """

    features: FeatureMatrix
    importance: np.ndarray
    labels: np.ndarray
    regenerated_rows: int


def _unit_rows(rng: Generator, count: int, dim: int) -> np.ndarray:
    """Standard-normal rows normalized to unit length; zero rows redrawn."""
    rows = rng.standard_normal((count, dim))
    while True:
        norms = np.linalg.norm(rows, axis=1)
        bad = np.flatnonzero(norms == 0.0)
        if not bad.size:
            break
        rows[bad] = rng.standard_normal((bad.size, dim))
    return rows / norms[:, None]


def generate_manifold(spec: ManifoldSpec) -> Manifold:
    """Draw a clustered token cloud and uniform importance, deterministically.

    Tokens are Gaussian blobs around unit-direction centers scaled by
    ``center_scale``. With ``non_negative`` set, the whole cloud is shifted
    so its minimum entry is exactly 0, which guarantees every pairwise
    cosine similarity is non-negative.
    """
    rng = Generator(Philox(SeedSequence(spec.rng_seed)))
    centers = _unit_rows(rng, spec.n_clusters, spec.dim) * spec.center_scale
    labels = rng.integers(0, spec.n_clusters, size=spec.n_tokens)
    noise = rng.standard_normal((spec.n_tokens, spec.dim))
    importance = rng.random(spec.n_tokens)
    while True:
        zero = np.flatnonzero(importance == 0.0)
        if not zero.size:
            break
        importance[zero] = rng.random(zero.size)

    data = centers[labels] + spec.cluster_spread * noise
    regenerated = 0
    while True:
        shifted = data - data.min() if spec.non_negative else data
        bad = np.flatnonzero(np.linalg.norm(shifted, axis=1) == 0.0)
        if not bad.size:
            break
        for i in bad:
            data[i] = centers[labels[i]] + spec.cluster_spread * rng.standard_normal(spec.dim)
            regenerated += 1
    return Manifold(FeatureMatrix(shifted), importance, labels, regenerated)

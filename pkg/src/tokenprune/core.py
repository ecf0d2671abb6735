"""Domain types and feature geometry shared by all selectors and metrics.

Feature vectors ("tokens") live in a row-major matrix, one row per token.
All arithmetic is done in 64-bit floats; 32-bit inputs are widened on
construction so that downstream exact-equality oracles see deterministic
accumulation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    BudgetError,
    DegenerateVectorError,
    PairingError,
    ValidationError,
)

#: Default stabilizer added to the min-max denominator. Far below any
#: realistic score resolution, far above double rounding noise.
DEFAULT_EPSILON = 1e-8


class FeatureMatrix:
    """N token feature vectors of dimension d, immutable after construction.

    Row Euclidean norms are computed once and cached because every greedy
    selector asks for similarity rows against the same matrix repeatedly.
    Rows with zero norm are rejected here rather than patched downstream:
    cosine similarity is undefined for them and silently fixing them would
    corrupt any trade-off comparison built on top.
    """

    __slots__ = ("data", "norms")

    def __init__(self, data) -> None:
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValidationError(f"feature matrix must be 2-D, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"feature matrix must be at least 1x1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            bad = np.argwhere(~np.isfinite(arr))[0]
            raise ValidationError(f"non-finite feature value at row {bad[0]}, column {bad[1]}")
        arr = np.ascontiguousarray(arr)
        norms = np.linalg.norm(arr, axis=1)
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise DegenerateVectorError(f"token {zero[0]} has zero norm")
        arr.setflags(write=False)
        norms.setflags(write=False)
        self.data = arr
        self.norms = norms

    @property
    def n_tokens(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def __repr__(self) -> str:
        return f"FeatureMatrix(n_tokens={self.n_tokens}, dim={self.dim})"


def as_importance(scores, n_tokens: int | None = None) -> np.ndarray:
    """Validate raw importance scores and return them as a float64 vector.

    Raises PairingError when a paired token count is given and does not
    match, ValidationError for non-finite or non-1-D input.
    """
    w = np.asarray(scores, dtype=np.float64)
    if w.ndim != 1:
        raise ValidationError(f"importance must be a 1-D vector, got ndim={w.ndim}")
    if w.size < 1:
        raise ValidationError("importance vector is empty")
    if not np.all(np.isfinite(w)):
        bad = int(np.flatnonzero(~np.isfinite(w))[0])
        raise ValidationError(f"non-finite importance score at index {bad}")
    if n_tokens is not None and w.size != n_tokens:
        raise PairingError(
            f"importance length {w.size} does not match feature matrix with {n_tokens} tokens"
        )
    return w


def cosine_similarity(a, b) -> float:
    """Cosine similarity a.b / (|a||b|) of two equal-length vectors.

    Symmetric, scale-invariant for positive scalings, and exactly 1 for
    a == b up to rounding. Zero-norm input raises DegenerateVectorError
    because the denominator would vanish.
    """
    av = np.asarray(a, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    if av.shape != bv.shape or av.ndim != 1:
        raise ValidationError(f"expected equal-length 1-D vectors, got shapes {av.shape} and {bv.shape}")
    na = float(np.linalg.norm(av))
    nb = float(np.linalg.norm(bv))
    if na == 0.0 or nb == 0.0:
        raise DegenerateVectorError("cosine similarity is undefined for a zero-norm vector")
    return float(np.dot(av, bv) / (na * nb))


def similarity_row(features: FeatureMatrix, j: int) -> np.ndarray:
    """Cosine similarity of every token against token j, as a length-N vector.

    Entry i equals ``cosine_similarity(row_i, row_j)``; uses the cached row
    norms. This is the only similarity kernel used by the greedy selectors,
    so the incremental and from-scratch MMR variants see bit-identical
    values.
    """
    n = features.n_tokens
    if not 0 <= j < n:
        raise ValidationError(f"token index {j} out of range [0, {n})")
    dots = features.data @ features.data[j]
    return dots / (features.norms * features.norms[j])


def normalize_importance(w, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Min-max normalize raw importance scores into [0, 1].

    Computes ``(w - min w) / (max w - min w + epsilon)``. The epsilon keeps
    constant vectors well-defined (they map to all zeros) and the map is
    order-preserving, so every argmax taken on the output agrees with one
    taken on the input.
    """
    if epsilon <= 0.0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    wv = as_importance(w)
    lo = float(np.min(wv))
    hi = float(np.max(wv))
    return (wv - lo) / (hi - lo + epsilon)


@dataclass(frozen=True)
class Selection:
    """An ordered pruning result: which K tokens were kept and why.

    ``indices`` preserves selection order. ``step_scores`` holds the greedy
    objective value achieved at each step; its meaning is method-specific
    (raw importance for pure importance ranking, achieved min-distance for
    FPS, the MMR objective for MMR, log-det gain for DPP greedy steps).
    ``negative_sim_count`` is a diagnostic: how many negative cosine
    similarities the selector encountered while updating its running
    max-similarity state. On realistic token geometry it stays 0.
    """

    method: str
    indices: tuple[int, ...]
    step_scores: tuple[float, ...] | None = None
    lam: float | None = None
    negative_sim_count: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if len(self.indices) < 1:
            raise ValidationError("selection must contain at least one index")
        if len(set(self.indices)) != len(self.indices):
            raise ValidationError("selection indices must be distinct")
        if any(i < 0 for i in self.indices):
            raise ValidationError("selection indices must be non-negative")
        if self.step_scores is not None and len(self.step_scores) != len(self.indices):
            raise ValidationError(
                f"step_scores length {len(self.step_scores)} != number of indices {len(self.indices)}"
            )
        if self.lam is not None and not 0.0 <= self.lam <= 1.0:
            raise ValidationError(f"lambda must be in [0, 1], got {self.lam}")

    @property
    def k(self) -> int:
        return len(self.indices)

    def validate_against(self, n_tokens: int) -> None:
        """Check every index is addressable in a matrix of n_tokens rows."""
        if self.k > n_tokens:
            raise BudgetError(f"selection of size {self.k} exceeds token count {n_tokens}")
        hi = max(self.indices)
        if hi >= n_tokens:
            raise ValidationError(f"selection index {hi} out of range [0, {n_tokens})")


@dataclass
class MaxSimState:
    """Running max-similarity vector m of the incremental greedy update.

    Before any token is selected every entry is -1.0 (below any cosine
    similarity). After each pick of token j, ``m_i`` becomes the maximum
    similarity of token i to any selected token.
    """

    m: np.ndarray
    selected_mask: np.ndarray

    @classmethod
    def fresh(cls, n_tokens: int) -> "MaxSimState":
        return cls(np.full(n_tokens, -1.0), np.zeros(n_tokens, dtype=bool))

    def mark(self, features: FeatureMatrix, j: int) -> int:
        """Select token j, fold its similarity row into m.

        Returns the number of negative similarities seen in the row (the
        diagnostic counter the selectors accumulate).
        """
        row = similarity_row(features, j)
        self.selected_mask[j] = True
        np.maximum(self.m, row, out=self.m)
        return int(np.count_nonzero(row < 0.0))


def check_budget(n_tokens: int, k: int) -> None:
    """Raise BudgetError unless 1 <= k <= n_tokens."""
    if not 1 <= k <= n_tokens:
        raise BudgetError(f"budget k={k} must satisfy 1 <= k <= n_tokens={n_tokens}")


def take_rows(features: FeatureMatrix, indices: Sequence[int]) -> FeatureMatrix:
    """A new FeatureMatrix holding the given rows (copy, revalidated)."""
    idx = np.asarray(indices, dtype=np.int64)
    return FeatureMatrix(features.data[idx])

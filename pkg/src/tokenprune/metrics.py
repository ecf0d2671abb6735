"""Diagnostics for pruning quality: retention, clustering tendency, angles.

Two scalar coordinates summarize a selection. The importance retention
ratio is the fraction of total score mass the subset keeps. The Hopkins
statistic measures clustering tendency in cosine distance: values near 1
mean the kept tokens pile up (redundant), values near 0 mean they are
regularly spread (diverse). Plotting (hopkins, retention) pairs per
strategy and extracting the Pareto frontier makes strategies comparable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from .core import FeatureMatrix, Selection, as_importance
from .errors import (
    DegenerateGeometryError,
    DomainError,
    UndefinedRatioError,
    ValidationError,
)

RANGE_SLACK = 1e-9

REFERENCE_MODES = ("resample_from_pool", "uniform_in_bbox")


@dataclass(frozen=True)
class TradeoffPoint:
    """One (strategy, lambda) evaluation on the hopkins/retention plane."""

    method: str
    lam: float | None
    hopkins: float
    retention: float

    def __post_init__(self) -> None:
        for name, v in (("hopkins", self.hopkins), ("retention", self.retention)):
            if not -RANGE_SLACK <= v <= 1.0 + RANGE_SLACK:
                raise ValidationError(f"{name}={v} outside [0, 1] (+/- {RANGE_SLACK})")


@dataclass(frozen=True)
class HopkinsConfig:
    """Sampling controls for the Hopkins statistic.

    ``resample_from_pool`` draws the reference set uniformly without
    replacement from the unselected tokens (falling back to the whole pool
    when too few remain); ``uniform_in_bbox`` draws uniformly inside the
    per-dimension bounding box of all tokens. The statistic is averaged
    over ``n_trials`` independent reference draws, each seeded from
    (rng_seed, trial index) so the result does not depend on scheduling.
    """

    rng_seed: int = 0
    reference_mode: str = "resample_from_pool"
    n_trials: int = 16

    def __post_init__(self) -> None:
        if self.n_trials < 1:
            raise ValidationError(f"n_trials must be >= 1, got {self.n_trials}")
        if self.reference_mode not in REFERENCE_MODES:
            raise ValidationError(
                f"reference_mode {self.reference_mode!r} not in {REFERENCE_MODES}"
            )
        if self.rng_seed < 0:
            raise ValidationError(f"rng_seed must be unsigned, got {self.rng_seed}")


def importance_retention(w, selection: Selection) -> float:
    """Fraction of total importance mass kept by the selection.

    Scores must be non-negative (the ratio is only meaningful then) and not
    all zero. Equals exactly 1.0 when the selection covers every token.
    """
    wv = as_importance(w)
    selection.validate_against(wv.size)
    if np.any(wv < 0.0):
        bad = int(np.flatnonzero(wv < 0.0)[0])
        raise DomainError(f"importance score at index {bad} is negative")
    total = float(np.sum(wv))
    if total == 0.0:
        raise UndefinedRatioError("total importance mass is zero; retention undefined")
    # Summing over sorted indices makes the full-set case bitwise equal to
    # the denominator sum, so full retention is exactly 1.0.
    kept = float(np.sum(wv[np.sort(np.asarray(selection.indices, dtype=np.int64))]))
    return kept / total


def _cos_dist_to_nearest(query_unit: np.ndarray, target_unit: np.ndarray) -> np.ndarray:
    """1 - max cosine similarity of each query row against the target rows.

    Similarities are clipped into [-1, 1] first so the distance is always
    in [0, 2] even when rounding pushes a self-similarity past 1.
    """
    best = (query_unit @ target_unit.T).max(axis=1)
    return 1.0 - np.clip(best, -1.0, 1.0)


def _reference_unit_rows(features: FeatureMatrix, unit: np.ndarray, sel_idx: np.ndarray,
                         m: int, rng: Generator, mode: str) -> np.ndarray:
    if mode == "resample_from_pool":
        pool = np.setdiff1d(np.arange(features.n_tokens), sel_idx)
        if pool.size >= m:
            ridx = rng.choice(pool, size=m, replace=False)
        else:
            ridx = rng.choice(features.n_tokens, size=m, replace=False)
        return unit[ridx]
    lo = features.data.min(axis=0)
    hi = features.data.max(axis=0)
    pts = rng.uniform(lo, hi, size=(m, features.dim))
    while True:
        norms = np.linalg.norm(pts, axis=1)
        bad = np.flatnonzero(norms == 0.0)
        if not bad.size:
            break
        pts[bad] = rng.uniform(lo, hi, size=(bad.size, features.dim))
    return pts / norms[:, None]


def hopkins_statistic(features: FeatureMatrix, selection: Selection,
                      cfg: HopkinsConfig = HopkinsConfig()) -> float:
    """Clustering tendency of the selected subset, in [0, 1].

    Per trial, a reference set of the subset's size is drawn and

        H = sum_r d(r, S) / (sum_r d(r, S) + sum_v d(v, S without v))

    is computed with d the cosine distance to the nearest neighbor; the
    mean over trials is returned. H is exactly 1.0 when all selected
    tokens coincide (their mutual distances vanish) while the references
    do not.
    """
    selection.validate_against(features.n_tokens)
    sel_idx = np.asarray(selection.indices, dtype=np.int64)
    m = sel_idx.size
    if m < 2:
        raise DomainError(f"hopkins statistic needs at least 2 selected tokens, got {m}")
    unit = features.data / features.norms[:, None]
    sel_unit = unit[sel_idx]
    gram = sel_unit @ sel_unit.T
    np.fill_diagonal(gram, -np.inf)
    self_dist = 1.0 - np.clip(gram.max(axis=1), -1.0, 1.0)
    sum_self = float(np.sum(self_dist))
    trial_values = []
    for trial in range(cfg.n_trials):
        rng = Generator(Philox(SeedSequence(entropy=cfg.rng_seed, spawn_key=(trial,))))
        ref_unit = _reference_unit_rows(features, unit, sel_idx, m, rng, cfg.reference_mode)
        sum_ref = float(np.sum(_cos_dist_to_nearest(ref_unit, sel_unit)))
        denom = sum_ref + sum_self
        if denom == 0.0:
            raise DegenerateGeometryError(
                "all reference and intra-subset distances are zero; statistic is 0/0"
            )
        trial_values.append(sum_ref / denom)
    return float(np.mean(trial_values))


@dataclass(frozen=True)
class AngleHistogram:
    """Pairwise-angle distribution over [0, 180] degrees.

    ``mass_above_90`` is the fraction of (sampled) pairs whose cosine
    similarity is negative; it is computed from the similarity sign, not
    the binned angles, so it is exactly 0 whenever every similarity is
    non-negative.
    """

    bin_edges: np.ndarray
    counts: np.ndarray
    mass_above_90: float
    n_pairs: int


def angle_histogram(features: FeatureMatrix, n_bins: int = 60,
                    max_pairs: int = 2_000_000, rng_seed: int = 0) -> AngleHistogram:
    """Histogram of pairwise angles (degrees) between token vectors.

    All N(N-1)/2 pairs are used when they fit under ``max_pairs``;
    otherwise ``max_pairs`` pairs are drawn uniformly (with replacement)
    using the seeded RNG. Bins are left-closed over [0, 180].
    """
    n = features.n_tokens
    if n < 2:
        raise DomainError(f"need at least 2 tokens for pairwise angles, got {n}")
    if n_bins < 1:
        raise ValidationError(f"n_bins must be >= 1, got {n_bins}")
    if max_pairs < 1:
        raise ValidationError(f"max_pairs must be >= 1, got {max_pairs}")
    total = n * (n - 1) // 2
    if total <= max_pairs:
        ii, jj = np.triu_indices(n, k=1)
    else:
        rng = Generator(Philox(SeedSequence(entropy=rng_seed)))
        ii = rng.integers(0, n, size=max_pairs)
        jj = rng.integers(0, n, size=max_pairs)
        while True:
            eq = ii == jj
            if not eq.any():
                break
            jj[eq] = rng.integers(0, n, size=int(eq.sum()))
    unit = features.data / features.norms[:, None]
    sims = np.einsum("ij,ij->i", unit[ii], unit[jj])
    angles = np.degrees(np.arccos(np.clip(sims, -1.0, 1.0)))
    edges = np.linspace(0.0, 180.0, n_bins + 1)
    counts, _ = np.histogram(angles, bins=edges)
    mass = float(np.count_nonzero(sims < 0.0)) / float(sims.size)
    return AngleHistogram(edges, counts, mass, int(sims.size))


def dominates(p: TradeoffPoint, q: TradeoffPoint) -> bool:
    """Strict Pareto dominance: at least as good on both axes, better on one.

    Good means higher retention and lower hopkins.
    """
    return (
        p.retention >= q.retention
        and p.hopkins <= q.hopkins
        and (p.retention > q.retention or p.hopkins < q.hopkins)
    )


def pareto_frontier(points: list[TradeoffPoint]) -> list[TradeoffPoint]:
    """Maximal points under (maximize retention, minimize hopkins).

    Returns them sorted by ascending hopkins with coordinate duplicates
    collapsed (first occurrence wins).
    """
    if not points:
        raise DomainError("cannot take the frontier of an empty point list")
    order = sorted(range(len(points)), key=lambda i: (points[i].hopkins, -points[i].retention))
    frontier: list[TradeoffPoint] = []
    best_retention = -np.inf
    for i in order:
        p = points[i]
        if p.retention > best_retention:
            frontier.append(p)
            best_retention = p.retention
    return frontier


@dataclass(frozen=True)
class DominanceReport:
    """Which points of set B are strictly dominated by some point of set A."""

    dominated: tuple[bool, ...]
    dominated_count: int
    total: int

    @property
    def fraction(self) -> float:
        return self.dominated_count / self.total

    def summary(self) -> str:
        return f"{self.dominated_count}/{self.total} points dominated ({self.fraction:.1%})"


def dominance_report(frontier_a: list[TradeoffPoint], points_b: list[TradeoffPoint]) -> DominanceReport:
    """For each point in B, check whether some point of A strictly dominates it."""
    if not frontier_a or not points_b:
        raise DomainError("dominance report needs two non-empty point lists")
    flags = tuple(any(dominates(p, q) for p in frontier_a) for q in points_b)
    return DominanceReport(flags, sum(flags), len(flags))

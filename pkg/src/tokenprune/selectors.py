"""Greedy subset-selection strategies over a token feature matrix.

Six selectors share one contract: given features, raw importance scores and
a budget K, return an ordered :class:`~tokenprune.core.Selection`.

* ``importance`` - pure top-K by raw score.
* ``fps``        - farthest point sampling in cosine distance, seeded at the
                   most important token.
* ``hybrid``     - importance top-P filter, then FPS inside the pool.
* ``mmr``        - maximal marginal relevance with an O(KN) incremental
                   max-similarity update.
* ``mmr-naive``  - the same objective recomputed from scratch each step,
                   O(K^2 N); kept as an equivalence oracle and benchmark
                   baseline.
* ``dpp``        - greedy MAP over a quality-diversity determinantal kernel.

Ties are always broken toward the lower index, which makes every selector
a pure deterministic function of (features, scores, config).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_EPSILON,
    FeatureMatrix,
    MaxSimState,
    Selection,
    as_importance,
    check_budget,
    normalize_importance,
    similarity_row,
    take_rows,
)
from .errors import KernelConditioningError, ValidationError

#: Gains this close to zero (or below) stop the DPP greedy phase.
DPP_STOP_TOL = 1e-12
#: Conditional variances below -jitter mean the kernel is not PSD.
DPP_PSD_JITTER = 1e-8

LAMBDA_METHODS = frozenset({"mmr", "mmr-naive", "hybrid"})
ALL_METHODS = ("importance", "fps", "hybrid", "mmr", "mmr-naive", "dpp")


@dataclass(frozen=True)
class SelectorConfig:
    """Knobs shared by the selectors.

    ``lam`` weighs importance against diversity for MMR and the hybrid
    (1 = pure importance, 0 = pure diversity). ``dpp_quality_floor`` is
    added to normalized importance so zero-importance tokens remain
    selectable by the DPP. ``rng_seed`` is reserved for reproducibility
    metadata; no selector draws random numbers (ties are index-broken).
    """

    k: int
    lam: float = 0.5
    epsilon: float = DEFAULT_EPSILON
    dpp_quality_floor: float = 0.01
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValidationError(f"budget k must be >= 1, got {self.k}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValidationError(f"lambda must be in [0, 1], got {self.lam}")
        if self.epsilon <= 0.0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")
        if self.dpp_quality_floor < 0.0:
            raise ValidationError(f"dpp_quality_floor must be >= 0, got {self.dpp_quality_floor}")
        if self.rng_seed < 0:
            raise ValidationError(f"rng_seed must be unsigned, got {self.rng_seed}")


def _prepare(features: FeatureMatrix, w, k: int) -> np.ndarray:
    wv = as_importance(w, features.n_tokens)
    check_budget(features.n_tokens, k)
    return wv


def select_greedy_importance(features: FeatureMatrix, w, cfg: SelectorConfig) -> Selection:
    """Keep the K highest-scoring tokens, highest first; ties to lower index."""
    wv = _prepare(features, w, cfg.k)
    order = np.argsort(-wv, kind="stable")[: cfg.k]
    scores = tuple(float(wv[i]) for i in order)
    return Selection("importance", tuple(int(i) for i in order), scores)


def _fps_order(features: FeatureMatrix, w: np.ndarray, k: int) -> tuple[list[int], list[float], int]:
    """Farthest-point walk over a matrix: importance argmax first, then
    repeatedly the token with the largest minimum cosine distance to the
    selected set.

    Returns (indices, per-step objective, negative-similarity count).
    Step 1 records the seeding importance; later steps record the achieved
    min distance ``1 - max_sim``.
    """
    state = MaxSimState.fresh(features.n_tokens)
    first = int(np.argmax(w))
    indices = [first]
    scores = [float(w[first])]
    neg = state.mark(features, first)
    for _ in range(1, k):
        cand = -state.m
        cand[state.selected_mask] = -np.inf
        pick = int(np.argmax(cand))
        indices.append(pick)
        scores.append(float(1.0 - state.m[pick]))
        neg += state.mark(features, pick)
    return indices, scores, neg


def select_fps(features: FeatureMatrix, w, cfg: SelectorConfig) -> Selection:
    """Farthest point sampling: greedy max-min cosine distance.

    The first pick is the importance argmax; every later pick maximizes the
    minimum cosine distance (equivalently, minimizes the maximum similarity)
    to the already-selected set.
    """
    wv = _prepare(features, w, cfg.k)
    indices, scores, neg = _fps_order(features, wv, cfg.k)
    return Selection("fps", tuple(indices), tuple(scores), negative_sim_count=neg)


def select_naive_hybrid(features: FeatureMatrix, w, cfg: SelectorConfig) -> Selection:
    """Two-stage baseline: importance top-P filter, then FPS within the pool.

    The pool size interpolates linearly between the two degenerate regimes,
    ``P = round(K + (1 - lam) * (N - K))`` (half-up), clamped to [K, N]:
    lam=1 keeps only the top-K (pure importance as a set), lam=0 keeps
    everything (pure FPS). Returned indices refer to the original matrix.
    """
    wv = _prepare(features, w, cfg.k)
    n = features.n_tokens
    p_real = cfg.k + (1.0 - cfg.lam) * (n - cfg.k)
    p = int(math.floor(p_real + 0.5))
    p = min(max(p, cfg.k), n)
    pool = np.sort(np.argsort(-wv, kind="stable")[:p])
    sub = take_rows(features, pool)
    sub_indices, scores, neg = _fps_order(sub, wv[pool], cfg.k)
    indices = tuple(int(pool[i]) for i in sub_indices)
    return Selection("hybrid", indices, tuple(scores), lam=cfg.lam, negative_sim_count=neg)


def select_mmr(features: FeatureMatrix, w, cfg: SelectorConfig) -> Selection:
    """Maximal marginal relevance with the incremental max-similarity update.

    Importance is min-max normalized; a running vector m tracks each
    candidate's maximum similarity to the selected set (-1 before any pick).
    Step 1 takes the importance argmax; step t >= 2 takes

        argmax over unselected i of  lam * Imp_i - (1 - lam) * m_i

    and then folds the winner's similarity row into m. Only that one
    length-N row is ever materialized, never an N x N matrix, which is what
    keeps the update O(KN) overall.
    """
    wv = _prepare(features, w, cfg.k)
    imp = normalize_importance(wv, cfg.epsilon)
    lam = cfg.lam
    state = MaxSimState.fresh(features.n_tokens)
    first = int(np.argmax(imp))
    indices = [first]
    scores = [float(imp[first])]
    neg = state.mark(features, first)
    for _ in range(1, cfg.k):
        obj = lam * imp - (1.0 - lam) * state.m
        obj[state.selected_mask] = -np.inf
        pick = int(np.argmax(obj))
        indices.append(pick)
        scores.append(float(obj[pick]))
        neg += state.mark(features, pick)
    return Selection("mmr", tuple(indices), tuple(scores), lam=lam, negative_sim_count=neg)


def select_mmr_naive(features: FeatureMatrix, w, cfg: SelectorConfig) -> Selection:
    """MMR with the max-similarity term recomputed from scratch each step.

    Same contract and bit-identical output to :func:`select_mmr`; the only
    difference is cost, O(K^2 N) instead of O(KN). Exists as an equivalence
    oracle and benchmark baseline.
    """
    wv = _prepare(features, w, cfg.k)
    imp = normalize_importance(wv, cfg.epsilon)
    lam = cfg.lam
    n = features.n_tokens
    first = int(np.argmax(imp))
    indices = [first]
    scores = [float(imp[first])]
    neg = 0
    selected = np.zeros(n, dtype=bool)
    selected[first] = True
    for _ in range(1, cfg.k):
        m = np.full(n, -1.0)
        for j in indices:
            row = similarity_row(features, j)
            neg += int(np.count_nonzero(row < 0.0))
            np.maximum(m, row, out=m)
        obj = lam * imp - (1.0 - lam) * m
        obj[selected] = -np.inf
        pick = int(np.argmax(obj))
        indices.append(pick)
        scores.append(float(obj[pick]))
        selected[pick] = True
    return Selection("mmr-naive", tuple(indices), tuple(scores), lam=lam, negative_sim_count=neg)


def greedy_map_logdet(kernel: np.ndarray, k_max: int, stop_tol: float = DPP_STOP_TOL,
                      psd_jitter: float = DPP_PSD_JITTER) -> tuple[list[int], list[float]]:
    """Greedy MAP over a PSD kernel: repeatedly add the item with the largest
    log-determinant gain, stopping once no remaining gain exceeds stop_tol.

    Uses the incremental Cholesky-style update, so the gain of item i at
    each step is log of its conditional variance given the selected set.
    Raises KernelConditioningError if a conditional variance drops below
    -psd_jitter, which means the kernel was not PSD to begin with.
    """
    n = kernel.shape[0]
    di2s = np.array(np.diag(kernel), dtype=np.float64)
    cis = np.empty((min(k_max, n), n), dtype=np.float64)
    selected_mask = np.zeros(n, dtype=bool)
    chosen: list[int] = []
    gains: list[float] = []
    for t in range(min(k_max, n)):
        masked = np.where(selected_mask, -np.inf, di2s)
        best = int(np.argmax(masked))
        best_val = masked[best]
        gain = math.log(best_val) if best_val > 0.0 else -math.inf
        if not gain > stop_tol:
            break
        if t == 0:
            eis = kernel[best, :] / math.sqrt(best_val)
        else:
            eis = (kernel[best, :] - cis[:t, best] @ cis[:t, :]) / math.sqrt(best_val)
        cis[t, :] = eis
        di2s -= eis * eis
        selected_mask[best] = True
        chosen.append(best)
        gains.append(float(gain))
        bad = di2s[~selected_mask]
        if bad.size and float(np.min(bad)) < -psd_jitter:
            raise KernelConditioningError(
                f"kernel conditional variance {float(np.min(bad)):.3e} below -{psd_jitter:g}; not PSD"
            )
    return chosen, gains


def select_dpp(features: FeatureMatrix, w, cfg: SelectorConfig) -> Selection:
    """Greedy MAP inference over a quality-diversity DPP kernel.

    The kernel is L = diag(q) S diag(q) with S the full cosine-similarity
    matrix and q = normalized importance + quality floor. Greedy picks
    maximize log-det gain; once every remaining gain is non-positive the
    selection is padded to K by descending normalized importance (those
    padding steps record the token's importance as their step score).

    Note this materializes the N x N similarity matrix, unlike the MMR
    path; it is meant for analysis-scale N.
    """
    wv = _prepare(features, w, cfg.k)
    imp = normalize_importance(wv, cfg.epsilon)
    q = imp + cfg.dpp_quality_floor
    unit = features.data / features.norms[:, None]
    sim = unit @ unit.T
    kernel = sim * np.outer(q, q)
    chosen, gains = greedy_map_logdet(kernel, cfg.k)
    indices = list(chosen)
    scores = list(gains)
    if len(indices) < cfg.k:
        taken = np.zeros(features.n_tokens, dtype=bool)
        taken[indices] = True
        for i in np.argsort(-imp, kind="stable"):
            if taken[i]:
                continue
            indices.append(int(i))
            scores.append(float(imp[i]))
            if len(indices) == cfg.k:
                break
    return Selection("dpp", tuple(indices), tuple(scores))


_SELECTORS = {
    "importance": select_greedy_importance,
    "fps": select_fps,
    "hybrid": select_naive_hybrid,
    "mmr": select_mmr,
    "mmr-naive": select_mmr_naive,
    "dpp": select_dpp,
}


def run_selector(method: str, features: FeatureMatrix, w, cfg: SelectorConfig) -> Selection:
    """Dispatch by method tag; raises ValidationError for unknown tags."""
    try:
        fn = _SELECTORS[method]
    except KeyError:
        raise ValidationError(
            f"unknown method {method!r}; expected one of {', '.join(ALL_METHODS)}"
        ) from None
    return fn(features, w, cfg)

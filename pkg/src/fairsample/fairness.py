"""Empirical metric-fairness estimation for score-producing models.

A model is (alpha, gamma)-metric-fair on a sample when the fraction of
pairs whose score gap exceeds their similarity distance plus gamma is at
most alpha.  The similarity metric here is sensitive-blind by
construction: the scaled Euclidean distance over the encoded coordinates
not derived from sensitive attributes,

    d(x, x') = ||(x - x')[mask]||_2 / sqrt(#mask)

which maps into [0, 1] for coordinates in [0, 1] and therefore shares the
range of score differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import EncodedDataset

DEFAULT_EXHAUSTIVE_CAP = 2000
DEFAULT_SAMPLE_PAIRS = 50_000
_TOP_VIOLATIONS = 10


@dataclass(frozen=True)
class SimilarityMetric:
    """Sensitive-blind scaled Euclidean metric over encoded coordinates."""

    mask: np.ndarray
    scale: float

    def __post_init__(self) -> None:
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if not bool(np.any(self.mask)):
            raise ValueError("metric mask selects no coordinates")

    def distance(self, a: np.ndarray, b: np.ndarray) -> float:
        diff = (np.asarray(a, float) - np.asarray(b, float))[self.mask]
        return float(np.linalg.norm(diff) / self.scale)

    def project(self, X: np.ndarray) -> np.ndarray:
        """Rows restricted to masked coordinates, pre-divided by the scale."""
        return np.asarray(X, float)[:, self.mask] / self.scale


@dataclass(frozen=True)
class FairnessEstimate:
    alpha_hat: float
    gamma: float
    pairs_evaluated: int
    exhaustive: bool
    violating_pairs: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha_hat <= 1.0:
            raise ValueError("alpha_hat must lie in [0, 1]")


def build_metric(ds: EncodedDataset) -> SimilarityMetric:
    """Metric over the dataset's non-sensitive encoded coordinates."""
    count = int(np.sum(ds.non_sensitive_mask))
    if count == 0:
        raise ValueError("all encoded coordinates derive from sensitive attributes")
    return SimilarityMetric(mask=ds.non_sensitive_mask.copy(), scale=float(np.sqrt(count)))


def _pair_excesses(
    scores: np.ndarray,
    X: np.ndarray,
    metric: SimilarityMetric,
    exhaustive_cap: int,
    sample_pairs: int,
    seed: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, bool]:
    """Per-pair |score gap| - distance, exhaustively or on a seeded subsample.

    Returns (i, j, excess, exhaustive); pairs are unordered and distinct.
    """
    m = X.shape[0]
    Z = metric.project(X)
    if m <= exhaustive_cap:
        i_idx, j_idx = np.triu_indices(m, k=1)
        sq = np.einsum("ij,ij->i", Z, Z)
        gram = Z @ Z.T
        d2 = sq[i_idx] + sq[j_idx] - 2.0 * gram[i_idx, j_idx]
        dist = np.sqrt(np.maximum(d2, 0.0))
        gaps = np.abs(scores[i_idx] - scores[j_idx])
        return i_idx, j_idx, gaps - dist, True

    rng = np.random.default_rng([int(seed) & (2**63 - 1), 0x5A17])
    i_idx = rng.integers(0, m, size=sample_pairs)
    j_idx = rng.integers(0, m - 1, size=sample_pairs)
    j_idx = j_idx + (j_idx >= i_idx)  # uniform over ordered pairs with i != j
    diff = Z[i_idx] - Z[j_idx]
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    gaps = np.abs(scores[i_idx] - scores[j_idx])
    return i_idx, j_idx, gaps - dist, False


def empirical_metric_fairness(
    scores: np.ndarray,
    ds: EncodedDataset,
    metric: SimilarityMetric,
    gamma: float,
    exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP,
    sample_pairs: int = DEFAULT_SAMPLE_PAIRS,
    seed: int = 0,
) -> FairnessEstimate:
    """Fraction of row pairs violating |h(x) - h(x')| > d(x, x') + gamma.

    All m(m-1)/2 unordered pairs are checked when m <= exhaustive_cap;
    larger samples use ``sample_pairs`` seeded uniform draws, with the pair
    count reported in the result.
    """
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.shape[0] != ds.m:
        raise ValueError("scores must be one value per dataset row")
    if ds.m < 2:
        raise ValueError("need at least 2 rows to evaluate pairs")
    if scores.min() < -1e-12 or scores.max() > 1.0 + 1e-12:
        raise ValueError("scores must lie in [0, 1]")

    i_idx, j_idx, excess, exhaustive = _pair_excesses(
        scores, ds.X, metric, exhaustive_cap, sample_pairs, seed
    )
    violating = excess > gamma
    n_viol = int(np.sum(violating))
    worst: tuple[tuple[int, int, float], ...] = ()
    if n_viol:
        order = np.argsort(excess)[::-1][: min(_TOP_VIOLATIONS, n_viol)]
        worst = tuple(
            (int(i_idx[o]), int(j_idx[o]), float(excess[o])) for o in order
        )
    return FairnessEstimate(
        alpha_hat=n_viol / excess.size,
        gamma=gamma,
        pairs_evaluated=int(excess.size),
        exhaustive=exhaustive,
        violating_pairs=worst,
    )


def min_gamma_for_alpha(
    scores: np.ndarray,
    ds: EncodedDataset,
    metric: SimilarityMetric,
    alpha_target: float,
    exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP,
    sample_pairs: int = DEFAULT_SAMPLE_PAIRS,
    seed: int = 0,
) -> float:
    """Smallest gamma >= 0 whose violation rate is at most alpha_target.

    Computed as an order statistic of the pairwise excess values
    |score gap| - distance; exact when pairs are evaluated exhaustively.
    """
    if not 0.0 <= alpha_target <= 1.0:
        raise ValueError("alpha_target must lie in [0, 1]")
    scores = np.asarray(scores, dtype=np.float64)
    _, _, excess, _ = _pair_excesses(
        scores, ds.X, metric, exhaustive_cap, sample_pairs, seed
    )
    n = excess.size
    allowed = int(np.floor(alpha_target * n))
    if allowed >= n:
        return 0.0
    desc = np.sort(excess)[::-1]
    return float(max(0.0, desc[allowed]))

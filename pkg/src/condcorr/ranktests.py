"""Nonparametric two-sample machinery: rank-sum z-test, subsampling, histograms.

The rank-sum (Mann–Whitney) form is used rather than the signed-rank test:
the comparisons here are between two unpaired collections, and the
equal-size subsampling helper only makes sense for unpaired ranks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr
from scipy.stats import rankdata

from .errors import DataError, ValidationError

__all__ = [
    "RankSumResult",
    "DistributionHistogram",
    "wilcoxon_rank_sum",
    "equal_size_subsample",
    "distribution_histogram",
]

# smallest positive double; p below this is reported clamped, log10_p exact
_TINY_P = 5e-324
_LN10 = math.log(10.0)


@dataclass(frozen=True)
class RankSumResult:
    """Wilcoxon rank-sum z-test outcome for samples A vs B.

    Sign convention: z < 0 when A's ranks fall below the null expectation,
    i.e. A tends to be the smaller-valued sample.  p_two_sided is the normal
    two-tailed probability, clamped to the smallest positive double;
    log10_p carries the tail precisely far beyond that clamp.
    """

    z: float
    p_two_sided: float
    log10_p: float
    n_a: int
    n_b: int
    tie_groups: int


def wilcoxon_rank_sum(sample_a, sample_b) -> RankSumResult:
    """Rank-sum z-test with midrank ties and tie-corrected variance.

    W = sum of A's midranks over the pooled sample; z = (W − E[W]) / sd[W]
    with the tie correction factor 1 − Σ(t³ − t)/(n³ − n); no continuity
    correction.  Degenerate pooled samples (all values identical) have zero
    variance and are rejected.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    n_a, n_b = len(a), len(b)
    if n_a < 1 or n_b < 1 or n_a + n_b < 4:
        raise ValidationError(
            f"need n_a >= 1, n_b >= 1 and n_a + n_b >= 4, got {n_a} and {n_b}"
        )
    pooled = np.concatenate([a, b])
    if not np.all(np.isfinite(pooled)):
        raise ValidationError("samples must be finite")

    n = n_a + n_b
    ranks = rankdata(pooled, method="average")
    w = float(np.sum(ranks[:n_a]))

    _, counts = np.unique(pooled, return_counts=True)
    tie_groups = int(np.sum(counts > 1))
    tie_term = float(np.sum(counts.astype(np.float64) ** 3 - counts))
    correction = 1.0 - tie_term / (n**3 - n)
    variance = n_a * n_b * (n + 1) / 12.0 * correction
    if variance <= 0.0:
        raise DataError("all pooled values identical: rank-sum variance is zero")

    z = (w - n_a * (n + 1) / 2.0) / math.sqrt(variance)
    # erfc keeps ~1e-12 accuracy out to |z| ≈ 8; log_ndtr covers the far tail
    p = min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))
    log10_p = (float(log_ndtr(-abs(z))) + math.log(2.0)) / _LN10
    return RankSumResult(z, max(p, _TINY_P), log10_p, n_a, n_b, tie_groups)


def equal_size_subsample(larger, target_size: int, seed: int) -> np.ndarray:
    """Uniform subset without replacement, deterministic for a fixed seed.

    Used to compare two collections of unequal size on equal footing:
    random selection does not alter the normalized distribution.  Original
    element order is preserved.  PRNG is PCG64 (the numpy default stream).
    """
    values = np.asarray(larger)
    if not 0 <= target_size <= len(values):
        raise ValidationError(
            f"target_size {target_size} outside [0, {len(values)}]"
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    keep = np.sort(rng.permutation(len(values))[:target_size])
    return values[keep]


@dataclass(frozen=True)
class DistributionHistogram:
    """Normalized density histogram of a real-valued sample."""

    bin_edges: np.ndarray
    densities: np.ndarray
    sample_count: int


def distribution_histogram(values, bins: int | np.ndarray = 50) -> DistributionHistogram:
    """Density histogram over [min, max] (or explicit edges)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise DataError("cannot histogram an empty sample")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("histogram input must be finite")
    densities, edges = np.histogram(arr, bins=bins, density=True)
    return DistributionHistogram(edges, densities, int(arr.size))

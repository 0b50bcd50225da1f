"""Stage-2 thresholding: linear stretch, 1-D K-means, phase labeling.

The restored image is stretched to [0,1], its intensities are clustered
into K groups by Lloyd's algorithm (several seeded restarts, keep the best
within-cluster sum of squares), and the midpoints of consecutive sorted
centers become the K-1 thresholds that cut the range into phases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LLOYD_MAX_SWEEPS = 500
# below this size restart 0 seeds at the exact optimal contiguous partition
EXACT_SEED_LIMIT = 512


@dataclass(frozen=True)
class KMeansResult:
    """Sorted centers of the best restart plus per-restart energies."""

    centers: np.ndarray
    wcss: float
    restart_wcss: np.ndarray


@dataclass(frozen=True)
class PhaseLabeling:
    """Per-pixel phase labels in {1..K} with the centers, thresholds and
    per-phase mean intensities that produced them."""

    labels: np.ndarray
    centers: np.ndarray
    thresholds: np.ndarray
    phase_means: np.ndarray

    @property
    def k(self) -> int:
        return len(self.centers)


def stretch(g: np.ndarray) -> np.ndarray:
    """Affine map of g onto [0,1]; a constant image maps to all zeros."""
    g = np.asarray(g, dtype=float)
    if not np.isfinite(g).all():
        raise ValueError("cannot stretch a non-finite image")
    lo, hi = g.min(), g.max()
    if hi == lo:
        return np.zeros_like(g)
    return (g - lo) / (hi - lo)


def _lloyd(values: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, float]:
    """Lloyd iteration to an assignment fixpoint. Empty clusters are
    re-seeded at the value farthest from its currently assigned center."""
    centers = centers.copy()
    k = len(centers)
    prev = None
    for _ in range(LLOYD_MAX_SWEEPS):
        dist = (values[:, None] - centers[None, :]) ** 2
        assign = np.argmin(dist, axis=1)
        for j in range(k):
            if not np.any(assign == j):
                far = np.argmax(np.abs(values - centers[assign]))
                centers[j] = values[far]
                assign[far] = j
        if prev is not None and np.array_equal(assign, prev):
            break
        prev = assign
        for j in range(k):
            centers[j] = values[assign == j].mean()
    wcss = float(np.sum((values - centers[assign]) ** 2))
    return centers, wcss


def _segment_means(s1: np.ndarray, bounds) -> np.ndarray:
    """Means of sorted-value segments [bounds[i], bounds[i+1]) from the
    zero-padded prefix sum s1."""
    bounds = np.asarray(bounds)
    return (s1[bounds[1:]] - s1[bounds[:-1]]) / (bounds[1:] - bounds[:-1])


def _optimal_partition_means(xs: np.ndarray, k: int) -> np.ndarray:
    """Exact 1-D k-means on sorted values. Optimal clusters are contiguous
    in sorted order, so a dynamic program over split points (prefix-sum
    segment costs, O(k n^2)) finds the global optimum; returns its segment
    means. Only worth it for small inputs."""
    n = xs.size
    s1 = np.concatenate(([0.0], np.cumsum(xs)))
    s2 = np.concatenate(([0.0], np.cumsum(xs * xs)))

    def seg_cost(j, i):
        # within-segment sum of squares for xs[j:i]; j may be an array
        tot = s1[i] - s1[j]
        return (s2[i] - s2[j]) - tot * tot / (i - j)

    prev = np.full(n + 1, np.inf)
    prev[1:] = seg_cost(0, np.arange(1, n + 1))
    splits = np.zeros((k + 1, n + 1), dtype=int)
    for c in range(2, k + 1):
        cur = np.full(n + 1, np.inf)
        for i in range(c, n + 1):
            j = np.arange(c - 1, i)
            total = prev[j] + seg_cost(j, i)
            best = int(np.argmin(total))
            cur[i] = total[best]
            splits[c, i] = c - 1 + best
        prev = cur
    bounds = [n]
    for c in range(k, 1, -1):
        bounds.append(splits[c, bounds[-1]])
    bounds.append(0)
    return _segment_means(s1, bounds[::-1])


def _weighted_draw(distinct: np.ndarray, k: int, rng) -> np.ndarray:
    """First seed uniform from the distinct values, later seeds drawn with
    probability proportional to squared distance from the chosen set."""
    picks = [distinct[rng.integers(len(distinct))]]
    while len(picks) < k:
        d2 = np.min([(distinct - p) ** 2 for p in picks], axis=0)
        picks.append(rng.choice(distinct, p=d2 / d2.sum()))
    return np.array(picks)


def kmeans_1d(values: np.ndarray, k: int, restarts: int = 10,
              seed: int = 0) -> KMeansResult:
    """Cluster scalar values into k groups; return the sorted centers of the
    restart with the lowest within-cluster sum of squares.

    Seeding exploits the 1-D structure (optimal clusters are contiguous in
    sorted order). Restart 0 is deterministic: the exact optimal partition's
    segment means when n <= EXACT_SEED_LIMIT, the k-quantile partition's
    otherwise. Every other restart r draws from stream (seed, r), odd ones
    by squared-distance-weighted sampling of distinct values, even ones by
    seeding at a random contiguous partition's segment means; results are
    reproducible and restarts are order-independent (ties keep the earliest
    restart).
    """
    values = np.asarray(values, dtype=float).ravel()
    if k < 2:
        raise ValueError(f"need at least 2 clusters, got k={k}")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    distinct = np.unique(values)
    if len(distinct) < k:
        raise ValueError(f"need at least {k} distinct values, got {len(distinct)}")

    xs = np.sort(values)
    n = xs.size
    s1 = np.concatenate(([0.0], np.cumsum(xs)))
    best_centers, best_wcss = None, np.inf
    all_wcss = np.empty(restarts)
    for r in range(restarts):
        if r == 0:
            if n <= EXACT_SEED_LIMIT:
                init = _optimal_partition_means(xs, k)
            else:
                init = _segment_means(
                    s1, np.round(np.arange(k + 1) * n / k).astype(int))
        else:
            rng = np.random.default_rng([seed, r])
            if r % 2 == 1:
                init = _weighted_draw(distinct, k, rng)
            else:
                cuts = np.sort(rng.choice(np.arange(1, n), size=k - 1,
                                          replace=False))
                init = _segment_means(s1, np.concatenate(([0], cuts, [n])))
        centers, wcss = _lloyd(values, init)
        all_wcss[r] = wcss
        if wcss < best_wcss:
            best_centers, best_wcss = centers, wcss
    return KMeansResult(centers=np.sort(best_centers), wcss=best_wcss,
                        restart_wcss=all_wcss)


def label(g_stretched: np.ndarray, centers: np.ndarray) -> PhaseLabeling:
    """Assign phase i where threshold_{i-1} <= value < threshold_i, with
    thresholds the midpoints of consecutive centers (outer bounds 0 and 1).
    A value equal to a threshold joins the upper phase. An empty phase
    reports its center as the phase mean."""
    g_stretched = np.asarray(g_stretched, dtype=float)
    centers = np.asarray(centers, dtype=float)
    if centers.ndim != 1 or len(centers) < 2:
        raise ValueError("need a 1-D array of at least 2 centers")
    if np.any(np.diff(centers) < 0):
        raise ValueError("centers must be sorted ascending")
    thresholds = 0.5 * (centers[:-1] + centers[1:])
    labels = np.ones(g_stretched.shape, dtype=np.int32)
    for t in thresholds:
        labels += (g_stretched >= t).astype(np.int32)
    means = np.empty(len(centers))
    for i in range(len(centers)):
        mask = labels == i + 1
        means[i] = g_stretched[mask].mean() if np.any(mask) else centers[i]
    return PhaseLabeling(labels=labels, centers=centers.copy(),
                         thresholds=thresholds, phase_means=means)


def piecewise_constant(labeling: PhaseLabeling) -> np.ndarray:
    """Image with each pixel replaced by its phase's mean intensity."""
    return labeling.phase_means[labeling.labels - 1]

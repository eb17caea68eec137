"""Category-preserving iterative Wishart classification.

Pixels are first categorized by their dominant canonical target. Each
category is split into span-ordered seed clusters, merged down to a small
number of classes under a size cap, and refined with the complex-Wishart
distance. Non-mixed pixels only ever compete among clusters of their own
category; mixed pixels compete globally and adopt the winning cluster's
category.

Distances:
    pixel to center   d(T, V) = ln|V| + Tr(V^-1 T)
    center to center  D(i, j) = (1/2) [ ln|Vi| + ln|Vj|
                                        + Tr(Vi^-1 Vj + Vj^-1 Vi) ]
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .geodesic import SimilarityTriple
from .matrices import CoherencyMatrix

__all__ = [
    "ClassifierConfig",
    "PixelCategory",
    "Cluster",
    "categorize",
    "categorize_arrays",
    "initial_clusters",
    "wishart_pixel_distance",
    "wishart_center_distance",
    "merge_clusters",
    "iterate_classification",
]

# Pixels are scored against distance blocks of this many rows; the block
# grid is fixed so results never depend on the worker count.
_DISTANCE_BLOCK = 8192


@dataclass
class ClassifierConfig:
    """Clustering and iteration knobs."""

    initial_clusters_per_category: int = 30
    final_classes_per_category: int = 5
    max_iterations: int = 4
    convergence_fraction: float = 0.01
    mixed_threshold: float = 0.5
    center_regularization: float = 1e-6

    def __post_init__(self):
        if self.initial_clusters_per_category < 1:
            raise ValueError("initial_clusters_per_category must be >= 1")
        if self.final_classes_per_category < 1:
            raise ValueError("final_classes_per_category must be >= 1")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")
        if not 0.0 <= self.convergence_fraction <= 1.0:
            raise ValueError("convergence_fraction must lie in [0, 1]")
        if not 0.0 < self.mixed_threshold <= 1.0:
            raise ValueError("mixed_threshold must lie in (0, 1]")
        if self.center_regularization < 0.0:
            raise ValueError("center_regularization must be >= 0")


@dataclass(frozen=True)
class PixelCategory:
    """Dominant-target category of a pixel plus its mixed flag."""

    category: str
    mixed: bool


@dataclass
class Cluster:
    """One Wishart cluster.

    category indexes the target registry; source_ids lists the seed cluster
    ids merged into this one, so post-merge labels can be recomposed.
    """

    id: int
    category: int
    center: np.ndarray
    member_count: int
    source_ids: Tuple[int, ...] = ()

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.complex128)
        if self.center.shape != (3, 3):
            raise ValueError("cluster center must be a 3x3 matrix")
        if self.member_count < 0:
            raise ValueError("member_count must be >= 0")
        if not self.source_ids:
            self.source_ids = (self.id,)


def categorize(
    triple: SimilarityTriple, threshold: float = 0.5
) -> PixelCategory:
    """Assign the dominant-target category; flag the pixel mixed when the
    winning weight fails to exceed threshold * sum(w)."""
    total = sum(triple.w.values())
    if total <= 0.0:
        raise ValueError("invalid pixel: weights sum to zero")
    best_name = None
    best_w = -np.inf
    for name, value in triple.w.items():
        if value > best_w:
            best_name = name
            best_w = value
    return PixelCategory(best_name, bool(best_w / total <= threshold))


def categorize_arrays(w: np.ndarray, threshold: float = 0.5):
    """Vectorized categorization.

    Parameters
    ----------
    w : (n_targets, n_pixels) weight array
    threshold : mixed-pixel threshold on max(w) / sum(w)

    Returns
    -------
    category : (n_pixels,) int argmax indices (ties to the lowest index)
    mixed : (n_pixels,) bool
    valid : (n_pixels,) bool, False where weights are absent or sum to zero
    """
    w = np.asarray(w, dtype=np.float64)
    total = w.sum(axis=0)
    valid = np.isfinite(total) & (total > 0.0)
    category = np.argmax(np.where(np.isfinite(w), w, -np.inf), axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.max(w, axis=0) / total
    mixed = valid & (ratio <= threshold)
    return category, mixed, valid


# ---------------------------------------------------------------------------
# Wishart distances
# ---------------------------------------------------------------------------


def _center_matrix(center) -> np.ndarray:
    if isinstance(center, Cluster):
        return center.center
    if isinstance(center, CoherencyMatrix):
        return center.matrix
    return np.asarray(center, dtype=np.complex128)


def _regularize(centers: np.ndarray, epsilon: float) -> np.ndarray:
    """V + epsilon * (tr V / 3) * I, keeping near-singular centers usable."""
    tr = np.trace(centers, axis1=-2, axis2=-1).real
    return centers + (epsilon * tr / 3.0)[..., None, None] * np.eye(3)


def _logdet_and_inverse(centers: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    try:
        chol = np.linalg.cholesky(centers)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular cluster center") from exc
    diag = np.diagonal(chol, axis1=-2, axis2=-1).real
    logdet = 2.0 * np.log(diag).sum(axis=-1)
    return logdet, np.linalg.inv(centers)


def wishart_pixel_distance(t, center, epsilon: float = 0.0) -> float:
    """d(T, V) = ln|V| + Tr(V^-1 T) for one pixel and one center."""
    tm = t.matrix if isinstance(t, CoherencyMatrix) else np.asarray(t, complex)
    vm = _regularize(_center_matrix(center), epsilon) if epsilon else _center_matrix(center)
    logdet, vinv = _logdet_and_inverse(vm)
    return float(logdet + np.einsum("ij,ji->", vinv, tm).real)


def wishart_center_distance(c1, c2, epsilon: float = 0.0) -> float:
    """Symmetrized between-cluster distance D(i, j)."""
    v1 = _center_matrix(c1)
    v2 = _center_matrix(c2)
    if epsilon:
        v1 = _regularize(v1, epsilon)
        v2 = _regularize(v2, epsilon)
    ld1, inv1 = _logdet_and_inverse(v1)
    ld2, inv2 = _logdet_and_inverse(v2)
    cross = np.einsum("ij,ji->", inv1, v2).real + np.einsum("ij,ji->", inv2, v1).real
    return float(0.5 * (ld1 + ld2 + cross))


def _pixel_center_distances(
    t: np.ndarray, centers: np.ndarray, epsilon: float, workers: int = 1
) -> np.ndarray:
    """Distance matrix (n_pixels, n_centers).

    Work is split over a fixed grid of pixel blocks written to disjoint
    output slices, so any worker count produces identical bytes.
    """
    reg = _regularize(centers, epsilon)
    logdet, vinv = _logdet_and_inverse(reg)
    n = t.shape[0]
    out = np.empty((n, len(centers)), dtype=np.float64)
    spans = [(s, min(s + _DISTANCE_BLOCK, n)) for s in range(0, n, _DISTANCE_BLOCK)]

    def fill(span):
        s0, s1 = span
        out[s0:s1] = logdet + np.einsum("kij,pji->pk", vinv, t[s0:s1]).real

    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, spans))
    else:
        for span in spans:
            fill(span)
    return out


# ---------------------------------------------------------------------------
# clustering
# ---------------------------------------------------------------------------


def initial_clusters(
    pixels: np.ndarray,
    k: int,
    category: int = 0,
    start_id: int = 0,
) -> Tuple[List[Cluster], np.ndarray]:
    """Span-ordered equal-population seed clusters for one category.

    pixels has shape (n, 3, 3). Pixels are sorted by span and split into
    min(k, n) contiguous bins; the last bin absorbs the remainder. Returns
    the clusters plus each pixel's assigned cluster id.
    """
    pixels = np.asarray(pixels, dtype=np.complex128)
    n = pixels.shape[0]
    if n == 0:
        return [], np.empty(0, dtype=np.int64)
    if k < 1:
        raise ValueError("k must be >= 1")
    spans = np.trace(pixels, axis1=-2, axis2=-1).real
    order = np.argsort(spans, kind="stable")
    k_eff = min(k, n)
    base = n // k_eff
    labels = np.empty(n, dtype=np.int64)
    clusters: List[Cluster] = []
    for b in range(k_eff):
        lo = b * base
        hi = (b + 1) * base if b < k_eff - 1 else n
        members = order[lo:hi]
        cid = start_id + b
        labels[members] = cid
        clusters.append(
            Cluster(
                id=cid,
                category=category,
                center=pixels[members].mean(axis=0),
                member_count=len(members),
            )
        )
    return clusters, labels


def merge_clusters(
    clusters: Sequence[Cluster], config: ClassifierConfig
) -> List[Cluster]:
    """Greedy within-category merging under the size cap.

    Repeatedly merges the pair with the smallest center distance whose
    combined population stays within n_max = 2 * N / final_classes, where N
    is the category population. Stops at final_classes clusters or when no
    pair may merge. The cap applies only here, never during iteration.
    """
    work = sorted(clusters, key=lambda c: c.id)
    if not work:
        return []
    categories = {c.category for c in work}
    if len(categories) != 1:
        raise ValueError("merge_clusters expects clusters of a single category")
    n_total = sum(c.member_count for c in work)
    n_max = 2.0 * n_total / config.final_classes_per_category
    epsilon = config.center_regularization
    while len(work) > config.final_classes_per_category:
        best = None
        for i in range(len(work)):
            for j in range(i + 1, len(work)):
                if work[i].member_count + work[j].member_count > n_max:
                    continue
                d = wishart_center_distance(work[i], work[j], epsilon)
                if best is None or d < best[0]:
                    best = (d, i, j)
        if best is None:
            break
        _, i, j = best
        a, b = work[i], work[j]
        count = a.member_count + b.member_count
        center = (a.member_count * a.center + b.member_count * b.center) / count
        merged = Cluster(
            id=min(a.id, b.id),
            category=a.category,
            center=center,
            member_count=count,
            source_ids=tuple(sorted(a.source_ids + b.source_ids)),
        )
        work = [c for idx, c in enumerate(work) if idx not in (i, j)]
        work.append(merged)
        work.sort(key=lambda c: c.id)
    return work


def _recompute_clusters(
    t: np.ndarray,
    labels: np.ndarray,
    clusters: List[Cluster],
    categories: np.ndarray,
) -> List[Cluster]:
    """Means over current members; emptied clusters are retired."""
    survivors: List[Cluster] = []
    for cluster in clusters:
        members = labels == cluster.id
        count = int(members.sum())
        if count == 0:
            continue
        center = t[members].mean(axis=0)
        if np.trace(center).real <= 0.0:
            continue
        survivors.append(
            Cluster(
                id=cluster.id,
                category=cluster.category,
                center=center,
                member_count=count,
                source_ids=cluster.source_ids,
            )
        )
    return survivors


def iterate_classification(
    t: np.ndarray,
    categories: np.ndarray,
    mixed: np.ndarray,
    clusters: Sequence[Cluster],
    config: ClassifierConfig,
    initial_labels: np.ndarray,
    workers: int = 1,
) -> Tuple[np.ndarray, List[Cluster], List[Dict]]:
    """Iterative Wishart refinement of cluster labels.

    Parameters
    ----------
    t : (n, 3, 3) coherency matrices of the valid pixels
    categories : (n,) registry index per pixel (mixed pixels: seeded one)
    mixed : (n,) bool mixed flags; mixed pixels compete across all clusters
    clusters : post-merge clusters
    config : iteration knobs
    initial_labels : (n,) post-merge cluster id per pixel
    workers : worker threads for the distance blocks (result-invariant)

    Returns
    -------
    labels : (n,) final cluster id per pixel
    clusters : surviving clusters with refreshed centers and counts
    history : one record per pass with label-change counts and the total
        Wishart distance of the assignment (non-increasing across passes)
    """
    t = np.asarray(t, dtype=np.complex128)
    n = t.shape[0]
    work = sorted((c for c in clusters), key=lambda c: c.id)
    labels = np.asarray(initial_labels, dtype=np.int64).copy()
    current_cat = np.asarray(categories, dtype=np.int64).copy()
    mixed = np.asarray(mixed, dtype=bool)
    epsilon = config.center_regularization
    history: List[Dict] = []

    def distance_matrix(cluster_list):
        centers = np.stack([c.center for c in cluster_list])
        return _pixel_center_distances(t, centers, epsilon, workers)

    # pass 0: objective of the post-merge assignment, before any refinement
    if n and work:
        d0 = distance_matrix(work)
        ids0 = np.array([c.id for c in work])
        col0 = np.searchsorted(ids0, labels)
        objective = float(d0[np.arange(n), col0].sum())
    else:
        objective = 0.0
    history.append(
        {
            "iteration": 0,
            "changed": None,
            "changed_fraction": None,
            "objective": objective,
            "clusters": len(work),
        }
    )

    for iteration in range(1, config.max_iterations + 1):
        if n == 0 or not work:
            break
        dist = distance_matrix(work)
        cluster_ids = np.array([c.id for c in work])
        cluster_cat = np.array([c.category for c in work])
        allowed = mixed[:, None] | (cluster_cat[None, :] == current_cat[:, None])
        dist_masked = np.where(allowed, dist, np.inf)
        # clusters are id-ordered, so argmin ties resolve to the lowest id
        pick = np.argmin(dist_masked, axis=1)
        new_labels = cluster_ids[pick]
        changed = int(np.count_nonzero(new_labels != labels))
        objective = float(dist_masked[np.arange(n), pick].sum())
        current_cat = np.where(mixed, cluster_cat[pick], current_cat)
        labels = new_labels
        work = _recompute_clusters(t, labels, work, current_cat)
        history.append(
            {
                "iteration": iteration,
                "changed": changed,
                "changed_fraction": changed / n,
                "objective": objective,
                "clusters": len(work),
            }
        )
        if changed == 0 or changed / n < config.convergence_fraction:
            break
    return labels, work, history

"""Unsupervised choice of the cluster count and the propagation power.

Cluster count: over-segment the data into many small clusters, then build a
Ward dendrogram over the resulting centroids; large gaps between successive
merge distances mark natural cut points, and suggest_k ranks them. The
dendrogram itself is exported so a human can review the suggestion.

Propagation power: sweep p, fit the clustering at each power, and keep the p
whose fit has the smallest sqrt of the cluster loss ||Y^p W - G F||^2.

Classic internal indices (silhouette, Davies-Bouldin, Calinski-Harabasz) are
available as auxiliary reports only; they are deliberately not wired into
either selection rule because they proved unreliable for this pipeline.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .cluster import ClusterConfig, fit
from .errors import ConfigError, DataError
from .features import FeatureMatrix
from .propagation import Propagator

logger = logging.getLogger(__name__)


@dataclass
class Dendrogram:
    """Agglomerative merge history over m leaves.

    merges holds m-1 rows (cluster_a, cluster_b, distance, new_size) using
    linkage-matrix ids: leaves are 0..m-1 and merge i creates cluster m+i.
    Distances are within-cluster variance increases, so two singletons merge
    at ||x - y||^2 / 2.
    """

    n_leaves: int
    merges: list[tuple[int, int, float, int]]

    def heights(self) -> np.ndarray:
        return np.array([m[2] for m in self.merges], dtype=np.float64)


@dataclass
class PSweepResult:
    p_values: list[int]
    sqrt_losses: dict[int, float]
    chosen_p: int


def oversegment(values: np.ndarray, m: int, config: ClusterConfig):
    """Fit the joint model with m clusters; return (centroids, n_empty).

    Centroids are back-projected into the input feature space (the
    orthonormal projection preserves their pairwise distances), and rows for
    clusters that ended up empty are dropped.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    if m >= n:
        raise DataError(f"over-segmentation count m={m} must be below n={n}")
    result = fit(values, replace(config, n_clusters=m))
    counts = np.bincount(result.assignments, minlength=m)
    keep = counts > 0
    dropped = int(np.sum(~keep))
    if dropped:
        logger.warning("dropping %d empty over-segmentation centroids", dropped)
    centroids = result.centroids[keep] @ result.projection.T
    return centroids, dropped


def default_oversegmentation(n: int) -> int:
    """Default number of small clusters to over-segment into."""
    return max(2, min(500, n // 4))


def ward_linkage(points: np.ndarray) -> Dendrogram:
    """Agglomerative clustering minimizing the increase in within-cluster variance.

    Pair distances d(i, j) = n_i n_j / (n_i + n_j) * ||mu_i - mu_j||^2 are
    maintained with the Lance-Williams recurrence; each step merges the
    closest active pair, ties broken by the smallest (id_a, id_b).
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 2:
        raise DataError("ward_linkage needs a 2-D matrix with at least 2 rows")
    m = points.shape[0]
    sq = np.sum(points * points, axis=1)
    dist = np.maximum(sq[:, None] - 2.0 * points @ points.T + sq[None, :], 0.0) / 2.0
    # BLAS does not guarantee bit-identical (i, j) and (j, i) entries;
    # symmetrize so the upper triangle is the single source of truth.
    dist = (dist + dist.T) / 2.0
    np.fill_diagonal(dist, np.inf)
    upper = np.triu(np.ones((m, m), dtype=bool), k=1)
    active = np.ones(m, dtype=bool)
    sizes = np.ones(m, dtype=np.int64)
    ids = np.arange(m)
    merges: list[tuple[int, int, float, int]] = []

    for step in range(m - 1):
        masked = np.where(upper & active[:, None] & active[None, :], dist, np.inf)
        best = np.min(masked)
        rows, cols = np.nonzero(masked == best)
        pairs = [(min(ids[r], ids[c]), max(ids[r], ids[c]), r, c)
                 for r, c in zip(rows, cols)]
        id_a, id_b, si, sj = min(pairs)
        ni, nj = sizes[si], sizes[sj]
        other = active.copy()
        other[[si, sj]] = False
        nk = sizes[other]
        merged_dist = ((ni + nk) * dist[si, other] + (nj + nk) * dist[sj, other]
                       - nk * best) / (ni + nj + nk)
        dist[si, other] = merged_dist
        dist[other, si] = merged_dist
        active[sj] = False
        sizes[si] = ni + nj
        ids[si] = m + step
        merges.append((int(id_a), int(id_b), float(best), int(ni + nj)))

    return Dendrogram(n_leaves=m, merges=merges)


def suggest_k(dend: Dendrogram, k_min: int = 2, k_max: int | None = None):
    """Rank candidate cluster counts by the gap between successive merges.

    Cutting the dendrogram into k clusters removes the k-1 largest merges;
    score(k) is the drop from the cheapest removed merge to the costliest
    kept one, so a large score marks a natural cut. Returns (k, score)
    pairs, best first; ties prefer the smaller k. Degenerate data where
    every merge is free collapses to [(1, 0.0)].
    """
    heights = np.sort(dend.heights())
    m = dend.n_leaves
    if heights.size == 0:
        return [(1, 0.0)]
    if heights[-1] <= 1e-12:
        logger.warning("all merge distances are zero; no cluster structure found")
        return [(1, 0.0)]
    if k_max is None:
        k_max = m - 1
    lo = max(2, k_min)
    hi = min(k_max, m - 1)
    if lo > hi:
        raise ConfigError(f"empty candidate range [{k_min}, {k_max}] for {m} leaves")
    scored = [(int(k), float(heights[m - k] - heights[m - k - 1]))
              for k in range(lo, hi + 1)]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored


def cluster_loss(values, result) -> float:
    """||Y W - G F||^2 for a fitted model."""
    z = values @ result.projection
    resid = z - result.centroids[result.assignments]
    return float(np.einsum("ij,ij->", resid, resid))


def derived_seed(base_seed: int, values: np.ndarray) -> int:
    """Seed derived from (base seed, matrix content).

    Powers that leave the smoothed features unchanged (an edgeless graph
    smooths nothing, for instance) get identical seeds and therefore
    identical fits, so their loss curve is exactly flat.
    """
    digest = hashlib.sha256()
    digest.update(str(base_seed).encode())
    digest.update(np.ascontiguousarray(values, dtype=np.float64).tobytes())
    return int.from_bytes(digest.digest()[:4], "little")


def sweep_p(prop: Propagator, features: FeatureMatrix, k: int,
            p_range=range(1, 51), config: ClusterConfig | None = None) -> PSweepResult:
    """Fit at every power in p_range; choose the p with the smallest
    sqrt cluster loss, ties to the smaller p. Each power re-initializes
    with a seed derived from the base seed and the smoothed features."""
    if config is None:
        config = ClusterConfig(n_clusters=k)
    p_values = sorted(set(int(p) for p in p_range))
    if not p_values:
        raise ConfigError("p_range is empty")
    if p_values[0] < 1:
        raise ConfigError(f"propagation powers must be >= 1, got {p_values[0]}")
    sqrt_losses: dict[int, float] = {}
    for p in p_values:
        smoothed = prop.apply(features.values, p)
        result = fit(smoothed, replace(
            config, n_clusters=k, seed=derived_seed(config.seed, smoothed)))
        sqrt_losses[p] = float(np.sqrt(cluster_loss(smoothed, result)))
    chosen = min(p_values, key=lambda p: (sqrt_losses[p], p))
    return PSweepResult(p_values=p_values, sqrt_losses=sqrt_losses, chosen_p=chosen)


def internal_indices(values: np.ndarray, labels: np.ndarray) -> dict[str, float]:
    """Silhouette, Davies-Bouldin, and Calinski-Harabasz, for reporting only."""
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    uniq = np.unique(labels)
    k = len(uniq)
    n = len(labels)
    if k < 2 or k >= n:
        raise DataError("internal indices need 2 <= #clusters < n")
    remap = {c: i for i, c in enumerate(uniq)}
    lab = np.array([remap[c] for c in labels])
    centroids = np.vstack([values[lab == i].mean(axis=0) for i in range(k)])
    counts = np.bincount(lab, minlength=k)

    sq = np.sum(values * values, axis=1)
    d2 = np.maximum(sq[:, None] - 2.0 * values @ values.T + sq[None, :], 0.0)
    dist = np.sqrt(d2)
    sil_values = np.zeros(n)
    mean_to = np.zeros((n, k))
    for i in range(k):
        mean_to[:, i] = dist[:, lab == i].mean(axis=1)
    for idx in range(n):
        c = lab[idx]
        if counts[c] == 1:
            continue  # singleton: silhouette 0 by convention
        a = mean_to[idx, c] * counts[c] / (counts[c] - 1)  # exclude self
        b = np.min(np.delete(mean_to[idx], c))
        sil_values[idx] = (b - a) / max(a, b) if max(a, b) > 0 else 0.0
    silhouette = float(sil_values.mean())

    scatter = np.array([
        np.linalg.norm(values[lab == i] - centroids[i], axis=1).mean()
        for i in range(k)
    ])
    cdist = np.linalg.norm(centroids[:, None, :] - centroids[None, :, :], axis=2)
    ratios = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            if i != j and cdist[i, j] > 0:
                ratios[i, j] = (scatter[i] + scatter[j]) / cdist[i, j]
    davies_bouldin = float(np.max(ratios, axis=1).mean())

    overall = values.mean(axis=0)
    between = float(np.sum(counts * np.sum((centroids - overall) ** 2, axis=1)))
    within = float(sum(np.sum((values[lab == i] - centroids[i]) ** 2)
                       for i in range(k)))
    if within == 0:
        calinski = float("inf")
    else:
        calinski = (between / (k - 1)) / (within / (n - k))
    return {
        "silhouette": silhouette,
        "davies_bouldin": davies_bouldin,
        "calinski_harabasz": float(calinski),
    }


def save_dendrogram(dend: Dendrogram, path: str | Path) -> None:
    """JSON export with linkage-matrix semantics for external plotting."""
    payload = {
        "n_leaves": dend.n_leaves,
        "merges": [[a, b, d, s] for a, b, d, s in dend.merges],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                          encoding="utf-8")


def load_dendrogram(path: str | Path) -> Dendrogram:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    merges = [(int(a), int(b), float(d), int(s)) for a, b, d, s in payload["merges"]]
    return Dendrogram(n_leaves=int(payload["n_leaves"]), merges=merges)


def save_psweep(result: PSweepResult, path: str | Path) -> None:
    """CSV export: header p,sqrt_loss then one row per swept power."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["p", "sqrt_loss"])
        for p in result.p_values:
            writer.writerow([p, f"{result.sqrt_losses[p]:.12g}"])

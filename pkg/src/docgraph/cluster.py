"""Joint dimensionality reduction and clustering of propagated features.

Minimizes ||Y - G F W^T||^2 over a binary assignment matrix G (one cluster
per row), centroids F in the projected space, and a column-orthonormal
projection W, by alternating exact block updates. Because W is orthonormal,
the objective splits as

    ||Y - Y W W^T||^2 + ||Y W - G F||^2 = ||Y - G F W^T||^2

so the same loop simultaneously finds a subspace that reconstructs Y well
and centroids that cluster the projected rows tightly. Initialization uses
randomized PCA for W and k-means++ on the projected rows for G.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, NumericalError

logger = logging.getLogger(__name__)


@dataclass
class ClusterConfig:
    n_clusters: int
    cluster_weight: float = 1.0
    max_iter: int = 30
    tol: float = 1e-6
    seed: int = 0
    n_init: int = 10
    kmeans_max_iter: int = 300
    kmeans_n_init: int = 10
    normalize_rows: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.n_clusters < 2:
            raise ConfigError(f"n_clusters must be >= 2, got {self.n_clusters}")
        if self.kmeans_max_iter < 1 or self.kmeans_n_init < 1:
            raise ConfigError("kmeans_max_iter and kmeans_n_init must be >= 1")
        if self.cluster_weight != 1.0:
            # With weight 1 the two loss terms collapse into one factorization
            # objective with closed-form block updates; other weights would
            # need a different projection update and are not supported.
            raise ConfigError("only cluster_weight=1.0 is supported")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.tol < 0:
            raise ConfigError(f"tol must be >= 0, got {self.tol}")
        if self.n_init < 1:
            raise ConfigError(f"n_init must be >= 1, got {self.n_init}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")


@dataclass
class FitResult:
    assignments: np.ndarray  # (n,) int cluster ids
    centroids: np.ndarray    # (k, k') rows in the projected space
    projection: np.ndarray   # (d, k') column-orthonormal, k' = min(k, d)
    loss_trace: list[float] = field(default_factory=list)
    k: int = 0
    seed: int = 0

    @property
    def final_loss(self) -> float:
        return self.loss_trace[-1]


def one_hot(assignments: np.ndarray, k: int) -> np.ndarray:
    """Binary (n, k) membership matrix with exactly one 1 per row."""
    assignments = np.asarray(assignments, dtype=np.int64)
    if assignments.size and (assignments.min() < 0 or assignments.max() >= k):
        raise DataError("assignment outside [0, k)")
    g = np.zeros((len(assignments), k), dtype=np.float64)
    g[np.arange(len(assignments)), assignments] = 1.0
    return g


def _sq_distances(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, clamped at zero."""
    d2 = (
        np.sum(x * x, axis=1)[:, None]
        - 2.0 * (x @ centers.T)
        + np.sum(centers * centers, axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeanspp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: next center sampled proportionally to squared distance."""
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centers[0] = x[first]
    d2 = _sq_distances(x, centers[:1]).ravel()
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            # all remaining mass on already-chosen points: fall back to uniform
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = x[idx]
        d2 = np.minimum(d2, _sq_distances(x, centers[c:c + 1]).ravel())
    return centers


def _repair_empty(x, assign, centers, counts):
    """Reseed each empty cluster to the point farthest from its own centroid."""
    for c in np.nonzero(counts == 0)[0]:
        dist_own = np.einsum("ij,ij->i", x - centers[assign], x - centers[assign])
        donor_ok = counts[assign] > 1
        if not np.any(donor_ok):
            break  # only singletons left; nothing can be moved
        dist_own[~donor_ok] = -np.inf
        far = int(np.argmax(dist_own))
        counts[assign[far]] -= 1
        assign[far] = c
        counts[c] = 1
        centers[c] = x[far]
    return assign, centers, counts


def _kmeans_once(x, k, rng, max_iter):
    centers = _kmeanspp_init(x, k, rng)
    assign = np.full(x.shape[0], -1, dtype=np.int64)
    for _ in range(max_iter):
        d2 = _sq_distances(x, centers)
        new_assign = np.argmin(d2, axis=1)
        counts = np.bincount(new_assign, minlength=k)
        if np.any(counts == 0):
            new_assign, centers, counts = _repair_empty(x, new_assign, centers, counts)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(k):
            if counts[c]:
                centers[c] = x[assign == c].mean(axis=0)
    inertia = float(np.sum(np.min(_sq_distances(x, centers), axis=1)))
    return assign, centers, inertia


def kmeans(x: np.ndarray, k: int, seed=0, max_iter: int = 300, n_init: int = 10):
    """Best-of-n_init k-means with k-means++ seeding.

    Returns (assignments, centroids, inertia). Empty clusters are repaired by
    reseeding to the point farthest from its current centroid.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DataError(f"kmeans expects a 2-D matrix, got shape {x.shape}")
    if not 1 <= k <= x.shape[0]:
        raise DataError(f"k must be in [1, {x.shape[0]}], got {k}")
    best = None
    for r in range(n_init):
        rng = np.random.default_rng([seed, r] if np.isscalar(seed) else list(seed) + [r])
        result = _kmeans_once(x, k, rng, max_iter)
        if best is None or result[2] < best[2]:
            best = result
    return best


def randomized_pca(x: np.ndarray, k: int, seed=0, power_iters: int = 2,
                   oversample: int = 10) -> np.ndarray:
    """Orthonormal (d, k) basis approximating the top-k right singular subspace.

    Randomized range finder with power iterations; if the matrix has rank
    below k the basis is completed with arbitrary orthonormal directions.
    """
    x = np.asarray(x, dtype=np.float64)
    n, d = x.shape
    if not 1 <= k <= min(n, d):
        raise DataError(f"k must be in [1, min(n, d)={min(n, d)}], got {k}")
    rng = np.random.default_rng(seed)
    ell = min(k + oversample, d)
    sketch = x.T @ rng.standard_normal((n, ell))
    q, _ = np.linalg.qr(sketch)
    for _ in range(power_iters):
        q, _ = np.linalg.qr(x.T @ (x @ q))
    b = x @ q
    _, s, vt = np.linalg.svd(b, full_matrices=False)
    w = q @ vt.T[:, :k]
    rank = int(np.sum(s > (s[0] * 1e-12 if s.size and s[0] > 0 else np.inf)))
    if rank < k:
        logger.warning("input rank %d below k=%d; completing basis arbitrarily",
                       rank, k)
        w = _complete_orthonormal(w[:, :rank], k, d, rng)
    return w


def _complete_orthonormal(w_partial, k, d, rng):
    w = np.zeros((d, k), dtype=np.float64)
    r = w_partial.shape[1]
    w[:, :r] = w_partial
    filled = r
    while filled < k:
        cand = rng.standard_normal(d)
        cand -= w[:, :filled] @ (w[:, :filled].T @ cand)
        norm = np.linalg.norm(cand)
        if norm > 1e-8:
            w[:, filled] = cand / norm
            filled += 1
    return w


def update_centroids(values, assignments, projection, current) -> np.ndarray:
    """Each centroid becomes the mean of its cluster's projected rows.

    Clusters with no members keep their row from `current`.
    """
    z = values @ projection
    k = current.shape[0]
    out = current.astype(np.float64, copy=True)
    counts = np.bincount(assignments, minlength=k)
    sums = np.zeros_like(out)
    np.add.at(sums, assignments, z)
    nz = counts > 0
    out[nz] = sums[nz] / counts[nz, None]
    return out


def update_assignments(values, projection, centroids) -> np.ndarray:
    """Assign each row to the nearest centroid in the projected space.

    np.argmin resolves distance ties toward the smaller cluster index.
    """
    z = values @ projection
    return np.argmin(_sq_distances(z, centroids), axis=1)


def update_projection(values, assignments, centroids, current) -> np.ndarray:
    """Orthogonal-Procrustes step: W = U V^T from the thin SVD of Y^T (G F).

    This is the orthonormal minimizer of the objective with assignments and
    centroids fixed. If Y^T (G F) is exactly zero the rotation is undefined
    and the current projection is kept.
    """
    target = values.T @ centroids[assignments]
    if not np.any(target):
        logger.warning("projection update target is zero; keeping current projection")
        return current
    u, _, vt = np.linalg.svd(target, full_matrices=False)
    return u @ vt


def objective(values, assignments, centroids, projection) -> float:
    """||Y - G F W^T||^2, computed literally."""
    resid = values - centroids[assignments] @ projection.T
    return float(np.einsum("ij,ij->", resid, resid))


def embed(values: np.ndarray, projection: np.ndarray) -> np.ndarray:
    """Project rows into the clustering space: Y W."""
    return np.asarray(values, dtype=np.float64) @ projection


def _fit_once(values, k, config: ClusterConfig, restart: int) -> FitResult:
    k_embed = min(k, values.shape[1])
    w = randomized_pca(values, k_embed, seed=[config.seed, restart, 0])
    z = values @ w
    assign, centers, _ = kmeans(z, k, seed=[config.seed, restart, 1],
                                max_iter=config.kmeans_max_iter,
                                n_init=config.kmeans_n_init)
    f = centers.astype(np.float64)
    trace = [objective(values, assign, f, w)]
    for _ in range(config.max_iter):
        f = update_centroids(values, assign, w, f)
        assign = update_assignments(values, w, f)
        w = update_projection(values, assign, f, w)
        loss = objective(values, assign, f, w)
        trace.append(loss)
        prev = trace[-2]
        if prev - loss <= config.tol * max(prev, 1e-300):
            break
    return FitResult(assignments=assign, centroids=f, projection=w,
                     loss_trace=trace, k=k, seed=config.seed)


def fit(values: np.ndarray, config: ClusterConfig) -> FitResult:
    """Alternating minimization of ||Y - G F W^T||^2, best of n_init restarts.

    Within a restart: initialize W by randomized PCA, assignments by k-means
    on the projected rows, then cycle centroid, assignment, and projection
    updates until the relative loss change drops below tol. Restarts use
    independent derived seeds; ties in final loss go to the earliest restart.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise DataError(f"expected a 2-D matrix, got shape {values.shape}")
    n, d = values.shape
    k = config.n_clusters
    if k > n:
        raise DataError(f"n_clusters={k} exceeds number of rows {n}")
    if not np.all(np.isfinite(values)):
        raise NumericalError("input matrix contains non-finite values")
    if config.normalize_rows:
        norms = np.linalg.norm(values, axis=1, keepdims=True)
        values = np.divide(values, norms, out=values.copy(), where=norms > 0)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(
                lambda r: _fit_once(values, k, config, r), range(config.n_init)))
    else:
        results = [_fit_once(values, k, config, r) for r in range(config.n_init)]
    best = min(enumerate(results), key=lambda pair: (pair[1].final_loss, pair[0]))[1]
    return best

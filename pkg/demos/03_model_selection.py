"""
Choosing k and the propagation power without labels
===================================================

Two unsupervised dials: the number of clusters k (over-segment, then merge
hierarchically and look for the largest gap between merge costs) and the
propagation power p (sweep powers, keep the smallest square-root cluster
loss).
"""

import numpy as np

from docgraph.cluster import ClusterConfig
from docgraph.entity_graph import DocGraph
from docgraph.features import FeatureMatrix
from docgraph.model_selection import (
    oversegment,
    suggest_k,
    sweep_p,
    ward_linkage,
)
from docgraph.propagation import build_propagator

# ---------------------------------------------------------------------------
# 1. Plant five clearly separated blobs in 16 dimensions.
rng = np.random.default_rng(0)
k_true, n, d = 5, 600, 16
means = np.zeros((k_true, d))
means[np.arange(k_true), np.arange(k_true)] = 8.0
labels = np.tile(np.arange(k_true), n // k_true)
rng.shuffle(labels)
x = means[labels] + rng.normal(size=(n, d))

# ---------------------------------------------------------------------------
# 2. Deliberately over-segment into 50 small clusters, then merge the 50
#    centroids bottom-up with Ward linkage. The cost of each merge jumps when
#    genuinely different blobs are forced together; the largest jump marks
#    the planted k.
centroids, dropped = oversegment(x, 50, ClusterConfig(
    n_clusters=50, seed=0, n_init=3, kmeans_n_init=3, max_iter=20))
print(f"over-segmentation kept {len(centroids)} centroids "
      f"(dropped {dropped} empty)")

dendrogram = ward_linkage(centroids)
ranked = suggest_k(dendrogram, k_min=2, k_max=20)
print("top suggestions (k, merge-cost gap):")
for k, score in ranked[:5]:
    print(f"  k={k:<3d} gap={score:.2f}")
print(f"planted k was {k_true}")

# ---------------------------------------------------------------------------
# 3. Pick the propagation power on a ring graph over the same points: fit at
#    each power and keep the smallest sqrt cluster loss (ties go to the
#    smaller, cheaper power).
ring_edges = {(i, i + 1): 1.0 for i in range(n - 1)}
ring_edges[(0, n - 1)] = 1.0
ring = DocGraph(n=n, edges=ring_edges, kind="knn")
features = FeatureMatrix(ids=[f"d{i}" for i in range(n)], values=x,
                         kind="embedding")
sweep = sweep_p(build_propagator(ring), features, k=k_true,
                p_range=range(1, 7),
                config=ClusterConfig(n_clusters=k_true, seed=0,
                                     n_init=2, kmeans_n_init=2))
print("\npower sweep (p, sqrt loss):")
for p in sweep.p_values:
    marker = "  <- chosen" if p == sweep.chosen_p else ""
    print(f"  p={p}  {sweep.sqrt_losses[p]:.3f}{marker}")

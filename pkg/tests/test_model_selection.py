"""Cluster-count suggestion and propagation-power sweep."""
import itertools

import numpy as np
import pytest
from scipy.cluster.hierarchy import linkage

from docgraph.cluster import ClusterConfig, fit
from docgraph.entity_graph import DocGraph
from docgraph.errors import ConfigError, DataError
from docgraph.features import FeatureMatrix
from docgraph.model_selection import (
    Dendrogram,
    cluster_loss,
    default_oversegmentation,
    derived_seed,
    internal_indices,
    load_dendrogram,
    oversegment,
    save_dendrogram,
    save_psweep,
    suggest_k,
    sweep_p,
    ward_linkage,
)
from docgraph.propagation import build_propagator


def brute_force_ward(points):
    """O(m^3) reference: recompute every merge cost from the raw points."""
    clusters = {i: [i] for i in range(len(points))}
    ids = {i: i for i in range(len(points))}
    heights = []
    next_id = len(points)
    while len(clusters) > 1:
        best = None
        for a, b in itertools.combinations(sorted(clusters), 2):
            pa, pb = points[clusters[a]], points[clusters[b]]
            na, nb = len(pa), len(pb)
            delta = (na * nb / (na + nb)
                     * float(np.sum((pa.mean(axis=0) - pb.mean(axis=0)) ** 2)))
            key = (delta, min(ids[a], ids[b]), max(ids[a], ids[b]))
            if best is None or key < best[0]:
                best = (key, a, b)
        (delta, _, _), a, b = best
        heights.append(delta)
        clusters[a] = clusters[a] + clusters.pop(b)
        ids[a] = next_id
        next_id += 1
    return np.array(heights)


def test_ward_linkage_matches_brute_force(rng):
    for _ in range(15):
        m = int(rng.integers(2, 25))
        points = rng.normal(size=(m, int(rng.integers(1, 5))))
        dend = ward_linkage(points)
        np.testing.assert_allclose(dend.heights(), brute_force_ward(points),
                                   rtol=1e-9, atol=1e-12)


def test_ward_linkage_matches_scipy(rng):
    for _ in range(10):
        points = rng.normal(size=(int(rng.integers(2, 40)), 3))
        dend = ward_linkage(points)
        ref = np.sort(linkage(points, method="ward")[:, 2])
        # the library reports variance increases; scipy reports sqrt(2x) that
        np.testing.assert_allclose(np.sqrt(2.0 * np.sort(dend.heights())), ref,
                                   rtol=1e-9, atol=1e-12)


def test_ward_linkage_merge_bookkeeping():
    # 0.125 is exactly representable, so the two pair merges tie exactly
    # and the smaller-id pair must win the tie
    points = np.array([[0.0], [0.125], [10.0], [10.125]])
    dend = ward_linkage(points)
    assert dend.n_leaves == 4
    assert len(dend.merges) == 3
    first, second, third = dend.merges
    assert (first[0], first[1]) == (0, 1)
    assert (second[0], second[1]) == (2, 3)
    assert (third[0], third[1]) == (4, 5)  # merge ids continue from n_leaves
    assert third[3] == 4  # final cluster holds every point
    heights = dend.heights()
    assert heights[0] <= heights[1] <= heights[2]


def test_ward_linkage_handles_duplicate_points():
    points = np.zeros((6, 2))
    dend = ward_linkage(points)
    np.testing.assert_allclose(dend.heights(), 0.0, atol=1e-15)


def test_ward_linkage_input_validation():
    with pytest.raises(DataError):
        ward_linkage(np.zeros((1, 2)))
    with pytest.raises(DataError):
        ward_linkage(np.zeros(5))


def test_suggest_k_scores_gap_between_merges():
    # hand-built dendrogram over 6 leaves: heights 1, 1, 1, 10, 11
    merges = [(0, 1, 1.0, 2), (2, 3, 1.0, 2), (4, 5, 1.0, 2),
              (6, 7, 10.0, 4), (8, 9, 11.0, 6)]
    dend = Dendrogram(n_leaves=6, merges=merges)
    ranked = suggest_k(dend)
    assert ranked[0] == (3, 9.0)  # cutting the two big merges leaves 3 groups
    ks = [k for k, _ in ranked]
    assert sorted(ks) == [2, 3, 4, 5]


def test_suggest_k_tie_prefers_smaller_k():
    merges = [(0, 1, 1.0, 2), (2, 3, 3.0, 2), (4, 5, 5.0, 4)]
    dend = Dendrogram(n_leaves=4, merges=merges)
    ranked = suggest_k(dend)
    assert ranked == [(2, 2.0), (3, 2.0)]


def test_suggest_k_degenerate_flat_dendrogram():
    merges = [(0, 1, 0.0, 2), (2, 3, 0.0, 3)]
    dend = Dendrogram(n_leaves=3, merges=merges)
    assert suggest_k(dend) == [(1, 0.0)]


def test_suggest_k_range_validation():
    merges = [(0, 1, 1.0, 2), (2, 3, 4.0, 3)]
    dend = Dendrogram(n_leaves=3, merges=merges)
    with pytest.raises(ConfigError, match="range"):
        suggest_k(dend, k_min=5, k_max=9)
    only_two = suggest_k(dend, k_min=2, k_max=2)
    assert [k for k, _ in only_two] == [2]


def test_oversegment_backprojection_preserves_cluster_geometry(rng):
    means = np.array([[0.0, 0.0], [20.0, 0.0], [0.0, 20.0]])
    labels = rng.integers(0, 3, size=90)
    x = means[labels] + rng.normal(size=(90, 2))
    cfg = ClusterConfig(n_clusters=2, seed=0, n_init=2, kmeans_n_init=3)
    cents, dropped = oversegment(x, 12, cfg)
    assert cents.shape[1] == 2
    assert cents.shape[0] == 12 - dropped
    # every back-projected centroid sits near one of the true means
    d = np.linalg.norm(cents[:, None, :] - means[None, :, :], axis=2)
    assert d.min(axis=1).max() < 5.0


def test_oversegment_m_must_be_below_n(rng):
    x = rng.normal(size=(10, 3))
    with pytest.raises(DataError, match="below"):
        oversegment(x, 10, ClusterConfig(n_clusters=2, seed=0))


def test_default_oversegmentation_bounds():
    assert default_oversegmentation(10) == 2
    assert default_oversegmentation(200) == 50
    assert default_oversegmentation(100000) == 500


def test_cluster_loss_matches_literal_expression(rng):
    x = rng.normal(size=(40, 6))
    result = fit(x, ClusterConfig(n_clusters=3, seed=0, n_init=2))
    z = x @ result.projection
    literal = float(np.sum((z - result.centroids[result.assignments]) ** 2))
    assert cluster_loss(x, result) == pytest.approx(literal, rel=1e-12)


def test_derived_seed_depends_on_content(rng):
    a = rng.normal(size=(5, 3))
    assert derived_seed(0, a) == derived_seed(0, a.copy())
    assert derived_seed(0, a) != derived_seed(1, a)
    b = a.copy()
    b[0, 0] += 1e-9
    assert derived_seed(0, a) != derived_seed(0, b)


def dense_graph(rng, n, p_edge=0.4):
    edges = {(i, j): float(rng.uniform(0.5, 1.0))
             for i in range(n) for j in range(i + 1, n)
             if rng.random() < p_edge}
    return DocGraph(n=n, edges=edges, kind="ner")


def test_sweep_p_losses_match_refits(rng):
    graph = dense_graph(rng, 30)
    prop = build_propagator(graph)
    fm = FeatureMatrix(ids=[f"d{i}" for i in range(30)],
                       values=rng.normal(size=(30, 4)), kind="embedding")
    cfg = ClusterConfig(n_clusters=3, seed=0, n_init=2, kmeans_n_init=3)
    result = sweep_p(prop, fm, k=3, p_range=range(1, 4), config=cfg)
    assert result.p_values == [1, 2, 3]
    assert result.chosen_p == min(result.p_values,
                                  key=lambda p: (result.sqrt_losses[p], p))
    # each reported loss reproduces exactly when the fit is repeated
    for p in result.p_values:
        smoothed = prop.apply(fm.values, p)
        refit = fit(smoothed, ClusterConfig(
            n_clusters=3, seed=derived_seed(cfg.seed, smoothed),
            n_init=2, kmeans_n_init=3))
        assert result.sqrt_losses[p] == pytest.approx(
            float(np.sqrt(cluster_loss(smoothed, refit))), rel=1e-12)


def test_sweep_p_validates_range(rng):
    graph = dense_graph(rng, 10)
    prop = build_propagator(graph)
    fm = FeatureMatrix(ids=[f"d{i}" for i in range(10)],
                       values=rng.normal(size=(10, 3)), kind="embedding")
    with pytest.raises(ConfigError, match="empty"):
        sweep_p(prop, fm, k=2, p_range=[])
    with pytest.raises(ConfigError, match=">= 1"):
        sweep_p(prop, fm, k=2, p_range=[0, 1])


def test_internal_indices_favor_separated_blobs(rng):
    means = np.array([[0.0, 0.0], [30.0, 0.0], [0.0, 30.0]])
    labels = np.repeat(np.arange(3), 20)
    x = means[labels] + rng.normal(size=(60, 2))
    good = internal_indices(x, labels)
    bad = internal_indices(x, rng.integers(0, 3, size=60))
    assert good["silhouette"] > 0.8 > bad["silhouette"]
    assert good["davies_bouldin"] < bad["davies_bouldin"]
    assert good["calinski_harabasz"] > bad["calinski_harabasz"]
    with pytest.raises(DataError):
        internal_indices(x, np.zeros(60, dtype=int))


def test_dendrogram_json_roundtrip(tmp_path, rng):
    dend = ward_linkage(rng.normal(size=(8, 2)))
    path = tmp_path / "dend.json"
    save_dendrogram(dend, path)
    loaded = load_dendrogram(path)
    assert loaded.n_leaves == dend.n_leaves
    assert loaded.merges == dend.merges


def test_psweep_csv_format(tmp_path, rng):
    graph = dense_graph(rng, 12)
    prop = build_propagator(graph)
    fm = FeatureMatrix(ids=[f"d{i}" for i in range(12)],
                       values=rng.normal(size=(12, 3)), kind="embedding")
    cfg = ClusterConfig(n_clusters=2, seed=0, n_init=1, kmeans_n_init=2)
    result = sweep_p(prop, fm, k=2, p_range=range(1, 4), config=cfg)
    path = tmp_path / "sweep.csv"
    save_psweep(result, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "p,sqrt_loss"
    assert len(lines) == 4
    for line, p in zip(lines[1:], result.p_values):
        sp, sloss = line.split(",")
        assert int(sp) == p
        assert float(sloss) == pytest.approx(result.sqrt_losses[p], rel=1e-10)

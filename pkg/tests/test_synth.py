"""Synthetic planted-partition corpus generator."""
import numpy as np
import pytest

from docgraph.entity_graph import corpus_entity_tokens
from docgraph.errors import ConfigError
from docgraph.synth import SynthConfig, generate


def small_config(**kw):
    defaults = dict(n_docs=60, k_true=3, entity_pool_size=12,
                    entities_per_doc=4, cross_topic_entity_leak=0.1,
                    feature_dim=5, seed=0)
    defaults.update(kw)
    return SynthConfig(**defaults)


def test_config_validation():
    with pytest.raises(ConfigError):
        SynthConfig(k_true=1)
    with pytest.raises(ConfigError):
        SynthConfig(cross_topic_entity_leak=1.0)
    with pytest.raises(ConfigError):
        SynthConfig(cross_topic_entity_leak=-0.1)
    with pytest.raises(ConfigError):
        SynthConfig(n_docs=3, k_true=5)
    with pytest.raises(ConfigError, match="pool"):
        SynthConfig(entity_pool_size=4, entities_per_doc=8)
    with pytest.raises(ConfigError):
        SynthConfig(feature_noise=-1.0)


def test_generate_shapes_and_labels():
    corpus, annotations, features = generate(small_config())
    assert corpus.n == 60
    assert corpus.k_true == 3
    assert features.values.shape == (60, 5)
    assert features.kind == "embedding"
    assert features.ids == corpus.ids
    assert set(annotations) == set(corpus.ids)
    assert corpus.ids == sorted(corpus.ids)  # doc00000-style zero-padded ids
    # labels as balanced as possible
    counts = np.bincount(corpus.labels)
    assert counts.max() - counts.min() <= 1


def test_generate_deterministic():
    a = generate(small_config())
    b = generate(small_config())
    assert [d.text for d in a[0]] == [d.text for d in b[0]]
    assert a[0].labels == b[0].labels
    np.testing.assert_array_equal(a[2].values, b[2].values)
    c = generate(small_config(seed=1))
    assert [d.text for d in a[0]] != [d.text for d in c[0]]


def test_every_annotated_surface_appears_in_text():
    corpus, annotations, _ = generate(small_config())
    for doc in corpus:
        for surface in corpus.entity_surfaces(doc.id):
            assert surface in doc.text


def test_annotations_deduplicated_per_document():
    corpus, _, _ = generate(small_config(cross_topic_entity_leak=0.5, seed=2))
    for doc in corpus:
        surfaces = corpus.entity_surfaces(doc.id)
        assert len(surfaces) == len(set(surfaces))


def test_zero_leak_gives_topic_pure_entities():
    corpus, _, _ = generate(small_config(cross_topic_entity_leak=0.0))
    topic_of_surface: dict[str, int] = {}
    for doc in corpus:
        for surface in corpus.entity_surfaces(doc.id):
            owner = topic_of_surface.setdefault(surface, doc.label)
            assert owner == doc.label  # no surface crosses topics


def cross_topic_pairs(corpus):
    """Count document pairs from different topics sharing an entity surface."""
    docs_of: dict[str, list[int]] = {}
    for idx, doc in enumerate(corpus):
        for surface in corpus.entity_surfaces(doc.id):
            docs_of.setdefault(surface, []).append(idx)
    labels = corpus.labels
    crossing = 0
    for doc_ids in docs_of.values():
        for a in range(len(doc_ids)):
            for b in range(a + 1, len(doc_ids)):
                crossing += labels[doc_ids[a]] != labels[doc_ids[b]]
    return crossing


def test_leak_monotonically_adds_cross_topic_sharing():
    counts = [
        sum(cross_topic_pairs(generate(small_config(
            cross_topic_entity_leak=leak, seed=seed))[0]) for seed in range(3))
        for leak in (0.0, 0.1, 0.4)
    ]
    assert counts[0] == 0
    assert counts[0] < counts[1] < counts[2]


def test_features_cluster_around_topic_means():
    corpus, _, features = generate(small_config(feature_noise=0.2, seed=4))
    labels = np.asarray(corpus.labels)
    centroids = np.vstack([
        features.values[labels == t].mean(axis=0) for t in range(3)
    ])
    own = np.linalg.norm(features.values - centroids[labels], axis=1)
    other = np.min(
        np.stack([
            np.linalg.norm(features.values - centroids[t], axis=1)
            for t in range(3)
        ]) + np.where(np.arange(3)[:, None] == labels[None, :], np.inf, 0.0),
        axis=0)
    assert np.all(own < other)  # tight blobs: every row nearest its own mean


def test_entity_pools_use_all_three_types():
    corpus, _, _ = generate(small_config())
    types = set()
    for ann in corpus.entities.values():
        types.update(ann.entities)
    assert types == {"PER", "ORG", "LOC"}
    toks = corpus_entity_tokens(corpus)
    assert all(any(t for t in by_type.values()) for by_type in toks)


def test_surfaces_are_two_word_title_case():
    corpus, _, _ = generate(small_config())
    surface = corpus.entity_surfaces(corpus.ids[0])[0]
    first, second = surface.split(" ")
    assert first.istitle() and second.istitle()

"""Synthetic planted-partition corpora for desk-scale pipeline testing.

Each topic owns a disjoint pool of invented named entities. Documents sample
entities from their topic's pool (occasionally "leaking" one from another
topic), get text stitched from those entity mentions plus shared filler
words, and get a feature vector drawn from their topic's Gaussian. The
planted labels then serve as ground truth for end-to-end accuracy checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Document, EntityAnnotation
from .errors import ConfigError
from .features import FeatureMatrix

_CONSONANTS = list("bdfgklmnprstvz")
_VOWELS = list("aeiou")
_ENTITY_TYPES = ("PER", "ORG", "LOC")


@dataclass
class SynthConfig:
    n_docs: int = 600
    k_true: int = 5
    entity_pool_size: int = 40
    entities_per_doc: int = 8
    cross_topic_entity_leak: float = 0.05
    feature_dim: int = 16
    feature_noise: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.k_true < 2:
            raise ConfigError(f"k_true must be >= 2, got {self.k_true}")
        if not 0.0 <= self.cross_topic_entity_leak < 1.0:
            raise ConfigError(
                f"cross_topic_entity_leak must be in [0, 1), got "
                f"{self.cross_topic_entity_leak}")
        if self.n_docs < self.k_true:
            raise ConfigError(
                f"n_docs={self.n_docs} cannot cover k_true={self.k_true} topics")
        if self.entities_per_doc < 1:
            raise ConfigError(
                f"entities_per_doc must be >= 1, got {self.entities_per_doc}")
        if self.entities_per_doc > self.entity_pool_size:
            raise ConfigError(
                f"entity pool of {self.entity_pool_size} is too small for "
                f"{self.entities_per_doc} entities per document")
        if self.feature_dim < 1:
            raise ConfigError(f"feature_dim must be >= 1, got {self.feature_dim}")
        if self.feature_noise < 0:
            raise ConfigError(f"feature_noise must be >= 0, got {self.feature_noise}")


def _pseudo_word(rng: np.random.Generator, syllables: int) -> str:
    return "".join(
        _CONSONANTS[rng.integers(len(_CONSONANTS))] + _VOWELS[rng.integers(len(_VOWELS))]
        for _ in range(syllables)
    )


def _entity_pools(rng, config) -> list[list[tuple[str, str]]]:
    """Disjoint per-topic pools of (type, two-word surface)."""
    seen: set[str] = set()
    pools = []
    for _ in range(config.k_true):
        pool = []
        while len(pool) < config.entity_pool_size:
            surface = (f"{_pseudo_word(rng, 2)} {_pseudo_word(rng, 2)}").title()
            if surface in seen:
                continue
            seen.add(surface)
            pool.append((_ENTITY_TYPES[len(pool) % len(_ENTITY_TYPES)], surface))
        pools.append(pool)
    return pools


def _doc_text(rng, surfaces: list[str], fillers: list[str]) -> str:
    """Stitch entity mentions into filler sentences."""
    parts = []
    for surface in surfaces:
        words = [fillers[rng.integers(len(fillers))] for _ in range(3)]
        parts.append(f"{words[0]} {words[1]} {surface} {words[2]}")
    return ". ".join(parts) + "."


def generate(config: SynthConfig):
    """Build (corpus with labels, entity annotations, feature matrix).

    Deterministic for a given seed. Documents are spread over topics as
    evenly as possible; each samples entities_per_doc distinct entities from
    its topic pool, each of which is replaced by a random foreign-topic
    entity with probability cross_topic_entity_leak.
    """
    rng = np.random.default_rng(config.seed)
    pools = _entity_pools(rng, config)
    fillers = sorted({_pseudo_word(rng, 2) for _ in range(80)})
    means = rng.normal(0.0, 1.0, size=(config.k_true, config.feature_dim))

    labels = np.tile(np.arange(config.k_true),
                     -(-config.n_docs // config.k_true))[:config.n_docs]
    rng.shuffle(labels)

    docs: list[Document] = []
    annotations: dict[str, EntityAnnotation] = {}
    rows = np.empty((config.n_docs, config.feature_dim), dtype=np.float64)
    for i, topic in enumerate(labels):
        chosen_idx = rng.choice(config.entity_pool_size, size=config.entities_per_doc,
                                replace=False)
        chosen = [pools[topic][j] for j in sorted(chosen_idx)]
        if config.cross_topic_entity_leak > 0 and config.k_true > 1:
            for slot in range(len(chosen)):
                if rng.random() < config.cross_topic_entity_leak:
                    foreign = int(rng.integers(config.k_true - 1))
                    foreign += foreign >= topic
                    pick = int(rng.integers(config.entity_pool_size))
                    chosen[slot] = pools[foreign][pick]
        # de-duplicate by surface, keeping first occurrence
        seen: set[str] = set()
        chosen = [e for e in chosen if not (e[1] in seen or seen.add(e[1]))]

        by_type: dict[str, list[str]] = {}
        for etype, surface in chosen:
            by_type.setdefault(etype, []).append(surface)
        doc_id = f"doc{i:05d}"
        docs.append(Document(
            id=doc_id,
            text=_doc_text(rng, [s for _, s in chosen], fillers),
            label=int(topic),
        ))
        annotations[doc_id] = EntityAnnotation(doc_id=doc_id, entities=by_type)
        rows[i] = means[topic] + config.feature_noise * rng.normal(
            0.0, 1.0, size=config.feature_dim)

    corpus = Corpus(docs)
    corpus.entities = annotations
    features = FeatureMatrix(ids=corpus.ids, values=rows, kind="embedding")
    return corpus, annotations, features

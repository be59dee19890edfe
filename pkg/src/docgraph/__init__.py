"""Document clustering via entity graphs, feature propagation, and joint
embedding-clustering.

The pipeline: build a document graph whose edges link documents sharing
similar named entities (or a cosine KNN baseline), smooth document features
over that graph with a normalized propagation operator, then cluster the
smoothed features by alternating minimization of a joint reconstruction and
clustering objective. Helpers select the cluster count (over-segmentation +
Ward dendrogram) and the propagation depth (cluster-loss sweep) without
labels, and score results with clustering accuracy, NMI, and ARI.
"""

from .cluster import ClusterConfig, FitResult, embed, fit, kmeans, randomized_pca
from .corpus import (
    Corpus,
    Document,
    EntityAnnotation,
    Vocabulary,
    build_vocabulary,
    load_corpus,
    load_entities,
    load_stopwords,
    save_corpus,
    save_entities,
    tokenize,
    tokenize_corpus,
)
from .entity_graph import (
    DocGraph,
    EntityMatch,
    ExactTokenVectors,
    GraphConfig,
    build_knn_graph,
    build_ner_graph,
    corpus_entity_tokens,
    cosine_sim,
    entity_coverage,
    find_matches,
    graph_stats,
    load_graph,
    save_graph,
)
from .errors import ConfigError, DataError, DocgraphError, NumericalError
from .features import (
    EmbedClientConfig,
    FeatureMatrix,
    build_bow,
    fetch_embeddings,
    load_embeddings,
    load_features,
    save_features,
)
from .metrics import accuracy, ari, evaluate, nmi
from .model_selection import (
    Dendrogram,
    PSweepResult,
    internal_indices,
    oversegment,
    suggest_k,
    sweep_p,
    ward_linkage,
)
from .propagation import Propagator, build_propagator, propagate
from .synth import SynthConfig, generate
from .word2vec import W2vConfig, WordVectors, load_vectors, save_vectors, train_cbow

__version__ = "0.1.0"

__all__ = [
    "ClusterConfig",
    "ConfigError",
    "Corpus",
    "DataError",
    "Dendrogram",
    "DocGraph",
    "DocgraphError",
    "Document",
    "EmbedClientConfig",
    "EntityAnnotation",
    "EntityMatch",
    "ExactTokenVectors",
    "FeatureMatrix",
    "FitResult",
    "GraphConfig",
    "NumericalError",
    "PSweepResult",
    "Propagator",
    "SynthConfig",
    "Vocabulary",
    "W2vConfig",
    "WordVectors",
    "accuracy",
    "ari",
    "build_bow",
    "build_knn_graph",
    "build_ner_graph",
    "build_propagator",
    "build_vocabulary",
    "corpus_entity_tokens",
    "cosine_sim",
    "embed",
    "entity_coverage",
    "evaluate",
    "fetch_embeddings",
    "find_matches",
    "fit",
    "generate",
    "graph_stats",
    "internal_indices",
    "kmeans",
    "load_corpus",
    "load_embeddings",
    "load_entities",
    "load_features",
    "load_graph",
    "load_stopwords",
    "load_vectors",
    "nmi",
    "oversegment",
    "propagate",
    "randomized_pca",
    "save_corpus",
    "save_entities",
    "save_features",
    "save_graph",
    "save_vectors",
    "suggest_k",
    "sweep_p",
    "tokenize",
    "tokenize_corpus",
    "train_cbow",
    "ward_linkage",
]

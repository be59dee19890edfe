"""
From annotated entities to a document graph
===========================================

Hand-builds a six-document corpus with typed entity annotations and walks
through matching, edge construction, and what the two thresholds
(similarity, shared-link count) do to the resulting graph.
"""

from docgraph.corpus import Corpus, Document, EntityAnnotation
from docgraph.entity_graph import (
    ExactTokenVectors,
    GraphConfig,
    build_ner_graph,
    corpus_entity_tokens,
    find_matches,
    graph_stats,
)

# ---------------------------------------------------------------------------
# 1. Three stories: a merger (documents 0-1), a match report (2-3), and two
#    unrelated notes (4-5). Annotations map entity type -> surface strings.
texts = [
    ("m0", "Acme Corp will acquire Bolt Ltd, said Ada Lovelace in Zurich."),
    ("m1", "Ada Lovelace confirmed Acme Corp's offer for Bolt Ltd."),
    ("s0", "United Rovers beat City FC; Grace Hopper scored twice."),
    ("s1", "Grace Hopper led United Rovers past City FC at home."),
    ("x0", "A quiet afternoon in Lima."),
    ("x1", "Rain is expected over Oslo."),
]
annotations = {
    "m0": {"ORG": ["Acme Corp", "Bolt Ltd"], "PER": ["Ada Lovelace"],
           "LOC": ["Zurich"]},
    "m1": {"ORG": ["Acme Corp", "Bolt Ltd"], "PER": ["Ada Lovelace"]},
    "s0": {"ORG": ["United Rovers", "City FC"], "PER": ["Grace Hopper"]},
    "s1": {"ORG": ["United Rovers", "City FC"], "PER": ["Grace Hopper"]},
    "x0": {"LOC": ["Lima"]},
    "x1": {"LOC": ["Oslo"]},
}
corpus = Corpus([Document(id=i, text=t) for i, t in texts])
corpus.entities = {i: EntityAnnotation(doc_id=i, entities=e)
                   for i, e in annotations.items()}

# Multi-word surfaces become single underscore-joined tokens.
doc_tokens = corpus_entity_tokens(corpus)
print("normalized entity tokens per document:")
for (doc_id, _), tokens in zip(texts, doc_tokens):
    print(f"  {doc_id}: {tokens}")

# ---------------------------------------------------------------------------
# 2. Match entities across documents. One-hot vectors make identical tokens
#    similarity 1.0 and everything else 0 — with trained word vectors,
#    near-synonyms cross the threshold too.
provider = ExactTokenVectors(
    t for doc in doc_tokens for toks in doc.values() for t in toks)
config = GraphConfig(sim_threshold=0.9, min_shared_links=3,
                     same_type_only=True)
matches = find_matches(doc_tokens, provider, config)
print(f"\n{len(matches)} cross-document entity matches; first three:")
for match in matches[:3]:
    print(f"  docs {match.doc_i}-{match.doc_j}: "
          f"{match.entity_i} ~ {match.entity_j} ({match.similarity:.2f})")

# ---------------------------------------------------------------------------
# 3. Keep an edge only where at least min_shared_links matches agree; the
#    edge weight is the mean similarity of those matches.
graph = build_ner_graph(matches, config, len(corpus))
print(f"\nedges at min_shared_links=3: {sorted(graph.edges)}")
print(f"stats: {graph_stats(graph)}")

# Raising the link threshold can only remove edges.
strict = GraphConfig(sim_threshold=0.9, min_shared_links=4)
stricter = build_ner_graph(find_matches(doc_tokens, provider, strict),
                           strict, len(corpus))
print(f"edges at min_shared_links=4: {sorted(stricter.edges)}")

"""Shared fixtures and helpers for the test suite."""
import numpy as np
import pytest

from docgraph.corpus import Corpus, Document, EntityAnnotation


def make_corpus(rows):
    """Build a corpus from (id, text) or (id, text, label) tuples."""
    docs = []
    for row in rows:
        if len(row) == 2:
            doc_id, text = row
            label = None
        else:
            doc_id, text, label = row
        docs.append(Document(id=doc_id, text=text, label=label))
    return Corpus(docs)


def annotate(corpus, mapping):
    """Attach entity annotations given {doc_id: {type: [surfaces]}}."""
    corpus.entities = {
        doc.id: EntityAnnotation(doc_id=doc.id,
                                 entities=dict(mapping.get(doc.id, {})))
        for doc in corpus
    }
    return corpus


@pytest.fixture
def rng():
    return np.random.default_rng(0)

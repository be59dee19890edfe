"""
Training word vectors from scratch (CBOW with negative sampling)
================================================================

Trains small in-package word vectors on a two-theme toy corpus and shows
that tokens sharing contexts end up close in cosine similarity, while the
save/load file format round-trips the model exactly.
"""

import tempfile
from pathlib import Path

from docgraph.corpus import Corpus, Document, load_stopwords, tokenize_corpus
from docgraph.word2vec import W2vConfig, load_vectors, save_vectors, train_cbow

# ---------------------------------------------------------------------------
# 1. Two themes that never mix: cooking documents and cycling documents.
cooking = "simmer the garlic butter sauce then whisk the garlic cream"
cycling = "shift the chain onto the sprocket then torque the pedal crank"
docs = []
for i in range(60):
    docs.append(Document(id=f"cook{i}", text=cooking))
    docs.append(Document(id=f"ride{i}", text=cycling))
corpus = Corpus(docs)
tokenize_corpus(corpus, load_stopwords("builtin:en"))  # drop "the", "then", ...

# ---------------------------------------------------------------------------
# 2. Train. Deterministic for a given seed with workers=1.
config = W2vConfig(dim=24, window=3, min_count=2, epochs=6,
                   negative_samples=4, seed=0)
vectors = train_cbow(corpus, config)
print(f"vocabulary size: {len(vectors.vocab.tokens)}")

# ---------------------------------------------------------------------------
# 3. Tokens from the same theme should score above cross-theme pairs.
pairs = [("garlic", "butter"), ("chain", "sprocket"),
         ("garlic", "chain"), ("butter", "sprocket")]
print("\ncosine similarities:")
for a, b in pairs:
    print(f"  {a:8s} ~ {b:10s} {vectors.similarity(a, b):+.3f}")

# ---------------------------------------------------------------------------
# 4. The binary format stores tokens, frequencies, and float32 rows; loading
#    gives back exactly what was saved.
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "vectors.bin"
    save_vectors(vectors, path)
    reloaded = load_vectors(path)
    same = (reloaded.vectors == vectors.vectors.astype("float32")).all()
    print(f"\nsaved {path.stat().st_size} bytes; reload exact: {bool(same)}")

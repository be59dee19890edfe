"""Node feature matrices: bag-of-words counts or document embeddings.

Embeddings either come from a JSONL file ({"id": str, "embedding": [float]})
or are fetched from an embeddings HTTP endpoint implementing the usual wire
contract (POST {base_url}/embeddings, bearer auth, {"data": [{"index",
"embedding"}]}). Fetched vectors are cached to JSONL so reruns stay offline.

At rest a feature matrix is float32 (header + row-major data + sibling id
manifest); in memory it is float64.
"""

from __future__ import annotations

import json
import logging
import os
import struct
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import requests

from .corpus import Corpus
from .errors import ConfigError, DataError

logger = logging.getLogger(__name__)

MAGIC = b"DGFM"
VERSION = 1
KINDS = ("bow", "llm", "embedding")


@dataclass
class FeatureMatrix:
    ids: list[str]
    values: np.ndarray  # (n, d) float64, row i = document ids[i]
    kind: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise DataError("feature matrix must be 2-dimensional")
        if self.values.shape[0] != len(self.ids):
            raise DataError("feature matrix row count != id count")
        if self.kind not in KINDS:
            raise DataError(f"unknown feature kind {self.kind!r}")
        if self.values.size and not np.isfinite(self.values).all():
            raise DataError("feature matrix contains non-finite values")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass
class EmbedClientConfig:
    base_url: str
    model_name: str
    api_key_env: str = "OPENAI_API_KEY"
    max_tokens_per_doc: int = 8191
    batch_size: int = 64
    max_attempts: int = 3
    backoff: float = 0.5
    timeout: float = 60.0
    cache_path: str | Path = "embeddings_cache.jsonl"

    def __post_init__(self):
        if self.max_tokens_per_doc < 1:
            raise ConfigError("max_tokens_per_doc must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.max_attempts < 1:
            raise ConfigError("max_attempts must be >= 1")


def build_bow(corpus: Corpus, max_features: int = 2000, tfidf: bool = False) -> FeatureMatrix:
    """Term-count matrix over the max_features most frequent tokens.

    Column order follows descending corpus frequency with lexicographic
    tie-break. With tfidf=True counts are scaled by log(n / doc_frequency).
    """
    if max_features < 1:
        raise ConfigError("max_features must be >= 1")
    counts: Counter = Counter()
    for doc in corpus:
        counts.update(doc.tokens)
    if not counts:
        raise DataError("no eligible tokens for bag-of-words features")
    ranked = sorted(counts.items(), key=lambda tc: (-tc[1], tc[0]))[:max_features]
    col = {tok: j for j, (tok, _) in enumerate(ranked)}
    values = np.zeros((corpus.n, len(col)), dtype=np.float64)
    for i, doc in enumerate(corpus):
        for tok, c in Counter(doc.tokens).items():
            j = col.get(tok)
            if j is not None:
                values[i, j] = c
    if tfidf:
        df = np.count_nonzero(values, axis=0).astype(np.float64)
        idf = np.log(corpus.n / np.maximum(df, 1.0))
        values *= idf
    return FeatureMatrix(ids=corpus.ids, values=values, kind="bow")


def _read_embedding_records(path: Path) -> dict[str, list[float]]:
    records: dict[str, list[float]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"malformed embeddings line {lineno}: {e}") from e
            if "id" not in rec or "embedding" not in rec:
                raise DataError(f"embeddings line {lineno}: need 'id' and 'embedding'")
            records[rec["id"]] = rec["embedding"]  # last record wins
    return records


def load_embeddings(path: str | Path, corpus: Corpus) -> FeatureMatrix:
    """Load a JSONL embedding file covering every corpus document.

    Rows come out in corpus order. A missing id, an inconsistent dimension,
    or a non-finite value raises DataError naming the offending id.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"embeddings file not found: {path}")
    records = _read_embedding_records(path)
    missing = [i for i in corpus.ids if i not in records]
    if missing:
        raise DataError(f"embeddings missing for {len(missing)} documents: "
                        f"{missing[:5]}{'...' if len(missing) > 5 else ''}")
    dim = None
    rows = []
    for doc_id in corpus.ids:
        vec = np.asarray(records[doc_id], dtype=np.float64)
        if vec.ndim != 1 or vec.size == 0:
            raise DataError(f"embedding for id {doc_id!r} is not a flat vector")
        if dim is None:
            dim = vec.size
        elif vec.size != dim:
            raise DataError(
                f"embedding dimension mismatch for id {doc_id!r}: {vec.size} vs {dim}")
        if not np.isfinite(vec).all():
            raise DataError(f"non-finite embedding value for id {doc_id!r}")
        rows.append(vec)
    return FeatureMatrix(ids=corpus.ids, values=np.vstack(rows), kind="llm")


def approx_token_count(text: str) -> int:
    """Whitespace token count; stands in for the remote model's tokenizer."""
    return len(text.split())


def _post_batch(session: requests.Session, config: EmbedClientConfig,
                texts: list[str], headers: dict) -> list[list[float]]:
    url = config.base_url.rstrip("/") + "/embeddings"
    payload = {"model": config.model_name, "input": texts}
    last_err: Exception | None = None
    for attempt in range(config.max_attempts):
        if attempt:
            time.sleep(config.backoff * (2 ** (attempt - 1)))
        try:
            resp = session.post(url, json=payload, headers=headers,
                                timeout=config.timeout)
        except requests.RequestException as e:
            last_err = e
            logger.warning("embeddings request failed (attempt %d): %s", attempt + 1, e)
            continue
        if resp.status_code >= 500:
            last_err = DataError(f"server error {resp.status_code}")
            logger.warning("embeddings server error %d (attempt %d)",
                           resp.status_code, attempt + 1)
            continue
        if resp.status_code != 200:
            raise DataError(f"embeddings request rejected: HTTP {resp.status_code}: "
                            f"{resp.text[:200]}")
        body = resp.json()
        data = body.get("data")
        if not isinstance(data, list):
            raise DataError("embeddings response missing 'data' list")
        got = {item["index"] for item in data}
        if got != set(range(len(texts))):
            raise DataError(
                f"embeddings response index set {sorted(got)[:10]} does not match "
                f"request of {len(texts)} inputs")
        ordered = [None] * len(texts)
        for item in data:
            ordered[item["index"]] = item["embedding"]
        return ordered
    raise DataError(f"embeddings request failed after {config.max_attempts} "
                    f"attempts: {last_err}")


def fetch_embeddings(corpus: Corpus, config: EmbedClientConfig,
                     ) -> tuple[FeatureMatrix, list[str]]:
    """Fetch document embeddings, excluding over-long documents.

    Documents whose whitespace token count exceeds max_tokens_per_doc are
    excluded (and listed in <cache>.exclusions.json); the matrix covers the
    remaining documents in corpus order. Vectors are cached to JSONL keyed
    by id, so a rerun with a warm cache issues no network calls.

    Returns (matrix over included documents, excluded ids).
    """
    cache_path = Path(config.cache_path)
    excluded = [d.id for d in corpus
                if approx_token_count(d.text) > config.max_tokens_per_doc]
    excluded_set = set(excluded)
    included = [d for d in corpus if d.id not in excluded_set]

    report = {
        "limit": config.max_tokens_per_doc,
        "token_counter": "whitespace (approximate)",
        "excluded": excluded,
    }
    cache_path.parent.mkdir(parents=True, exist_ok=True)
    with open(str(cache_path) + ".exclusions.json", "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2, sort_keys=True)
    if excluded:
        logger.warning("%d documents exceed %d tokens and were excluded",
                       len(excluded), config.max_tokens_per_doc)

    cached = _read_embedding_records(cache_path) if cache_path.exists() else {}
    to_fetch = [d for d in included if d.id not in cached]

    if to_fetch:
        api_key = os.environ.get(config.api_key_env, "")
        if not api_key:
            raise ConfigError(
                f"embeddings API key not set in environment variable {config.api_key_env}")
        headers = {"Authorization": f"Bearer {api_key}"}
        session = requests.Session()
        with open(cache_path, "a", encoding="utf-8") as cache_file:
            for start in range(0, len(to_fetch), config.batch_size):
                batch = to_fetch[start:start + config.batch_size]
                vectors = _post_batch(session, config, [d.text for d in batch], headers)
                for doc, vec in zip(batch, vectors):
                    cache_file.write(json.dumps({"id": doc.id, "embedding": vec}) + "\n")
                    cached[doc.id] = vec
        logger.info("fetched %d embeddings in %d batches", len(to_fetch),
                    -(-len(to_fetch) // config.batch_size))

    if not included:
        return FeatureMatrix(ids=[], values=np.zeros((0, 0)), kind="llm"), excluded
    view = corpus.subset({d.id for d in included})
    return load_embeddings(cache_path, view), excluded


def save_features(fm: FeatureMatrix, path: str | Path) -> None:
    """Write the binary feature file (float32) plus the sibling id manifest."""
    path = Path(path)
    kind_raw = fm.kind.encode("ascii")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<HHQIB", VERSION, 0, fm.n, fm.d, len(kind_raw)))
        f.write(kind_raw)
        f.write(np.ascontiguousarray(fm.values, dtype="<f4").tobytes())
    with open(str(path) + ".ids", "w", encoding="utf-8") as f:
        for doc_id in fm.ids:
            f.write(doc_id + "\n")


def load_features(path: str | Path) -> FeatureMatrix:
    """Read a feature file written by save_features; promotes to float64."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"feature file not found: {path}")
    data = path.read_bytes()
    if len(data) < 4 + 17 or data[:4] != MAGIC:
        raise DataError(f"bad feature file header: {path}")
    version, _flags, n, d, kind_len = struct.unpack_from("<HHQIB", data, 4)
    if version != VERSION:
        raise DataError(f"unsupported feature file version {version}")
    offset = 4 + 17
    kind = data[offset:offset + kind_len].decode("ascii")
    offset += kind_len
    expect = n * d * 4
    if len(data) - offset < expect:
        raise DataError(f"truncated feature file {path} at byte offset {offset}")
    values = np.frombuffer(data, dtype="<f4", count=n * d, offset=offset)
    values = values.reshape(n, d).astype(np.float64)
    ids_path = Path(str(path) + ".ids")
    if not ids_path.exists():
        raise DataError(f"missing id manifest next to feature file: {ids_path}")
    ids = [line for line in ids_path.read_text(encoding="utf-8").splitlines() if line]
    if len(ids) != n:
        raise DataError(f"id manifest length {len(ids)} != matrix rows {n}")
    return FeatureMatrix(ids=ids, values=values, kind=kind)

"""Document collection loading, tokenization, and vocabulary indexing.

The corpus is a JSONL file, one document per line: {"id": str, "text": str,
"label": int?}. Entity annotations come from a separate JSON/JSONL file of
records {"doc_id": str, "entities": {type: [surface, ...]}}. Tokenization is
NFC + lowercase + word characters only; multi-word entity surfaces are merged
into single underscore-joined tokens before stopword removal, so entity names
survive as units ("Kylian Mbappé" -> "kylian_mbappé").
"""

from __future__ import annotations

import importlib.resources
import json
import logging
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)


def normalize_text(text: str) -> str:
    """NFC-normalize and lowercase."""
    return unicodedata.normalize("NFC", text).lower()


def base_tokens(text: str) -> list[str]:
    """Split normalized text into word-character runs (letters/digits/_)."""
    return _TOKEN_RE.findall(normalize_text(text))


def entity_token(surface: str) -> str:
    """Normalized single-token form of an entity surface.

    Multi-word surfaces are joined with underscores; returns "" when the
    surface holds no word characters.
    """
    return "_".join(base_tokens(surface))


@dataclass
class Document:
    id: str
    text: str
    tokens: list[str] = field(default_factory=list)
    label: int | None = None
    flagged: bool = False  # empty token stream after normalization


@dataclass
class EntityAnnotation:
    doc_id: str
    entities: dict[str, list[str]]  # entity type -> surfaces, deduplicated


class Corpus:
    """Ordered, immutable-after-load document collection."""

    def __init__(self, documents: list[Document]):
        self.documents = documents
        self.by_id = {d.id: d for d in documents}
        if len(self.by_id) != len(documents):
            raise DataError("duplicate document ids in corpus")
        self.entities: dict[str, EntityAnnotation] = {}

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    @property
    def n(self) -> int:
        return len(self.documents)

    @property
    def ids(self) -> list[str]:
        return [d.id for d in self.documents]

    @property
    def labels(self) -> list[int] | None:
        """Ground-truth labels in corpus order, or None if any are missing."""
        if any(d.label is None for d in self.documents):
            return None
        return [d.label for d in self.documents]

    @property
    def k_true(self) -> int | None:
        labels = self.labels
        return len(set(labels)) if labels else None

    def entity_surfaces(self, doc_id: str) -> list[str]:
        """All annotated surfaces of one document, across types."""
        ann = self.entities.get(doc_id)
        if ann is None:
            return []
        out = []
        for surfaces in ann.entities.values():
            out.extend(surfaces)
        return out

    def subset(self, keep_ids: set[str]) -> "Corpus":
        """New corpus retaining only the given ids, in original order."""
        docs = [d for d in self.documents if d.id in keep_ids]
        sub = Corpus(docs)
        sub.entities = {
            i: ann for i, ann in self.entities.items() if i in keep_ids
        }
        return sub


def load_corpus(path: str | Path) -> Corpus:
    """Load a JSONL corpus, preserving file order.

    Raises DataError on a missing/empty file, a malformed line (named by
    line number), or a duplicate id (named by id).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"corpus file not found: {path}")
    docs: list[Document] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"malformed corpus line {lineno}: {e}") from e
            if not isinstance(rec, dict) or "id" not in rec or "text" not in rec:
                raise DataError(
                    f"malformed corpus line {lineno}: need 'id' and 'text' fields"
                )
            doc_id = rec["id"]
            if not isinstance(doc_id, str) or not doc_id:
                raise DataError(f"malformed corpus line {lineno}: id must be a non-empty string")
            if doc_id in seen:
                raise DataError(f"duplicate document id: {doc_id!r}")
            seen.add(doc_id)
            text = rec["text"]
            if not isinstance(text, str):
                raise DataError(f"malformed corpus line {lineno}: text must be a string")
            label = rec.get("label")
            if label is not None and (not isinstance(label, int) or label < 0):
                raise DataError(
                    f"malformed corpus line {lineno}: label must be a non-negative integer"
                )
            docs.append(Document(id=doc_id, text=text, label=label))
    if not docs:
        raise DataError("empty corpus")
    return Corpus(docs)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back out as JSONL, one document per line."""
    with open(path, "w", encoding="utf-8") as f:
        for doc in corpus:
            rec: dict = {"id": doc.id, "text": doc.text}
            if doc.label is not None:
                rec["label"] = doc.label
            f.write(json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n")


def save_entities(annotations: dict[str, EntityAnnotation], path: str | Path) -> None:
    """Write entity annotations as a JSON array of records."""
    records = [
        {"doc_id": ann.doc_id, "entities": ann.entities}
        for _, ann in sorted(annotations.items())
    ]
    Path(path).write_text(
        json.dumps(records, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


def _merge_patterns(surfaces) -> dict[int, set[tuple[str, ...]]]:
    """Group normalized multi-word entity token sequences by length."""
    by_len: dict[int, set[tuple[str, ...]]] = {}
    for surface in surfaces:
        parts = tuple(base_tokens(surface))
        if len(parts) >= 2:
            by_len.setdefault(len(parts), set()).add(parts)
    return by_len


def tokenize(text: str, stopwords: frozenset[str] | set[str] = frozenset(),
             merge_entities=()) -> list[str]:
    """Tokenize text: merge entity phrases, then drop stopwords.

    Multi-word entity surfaces found in the token stream become one
    underscore-joined token; longer surfaces win over shorter ones.
    Stopword removal happens after merging, so entities containing
    stopwords keep them inside the merged token.
    """
    tokens = base_tokens(text)
    by_len = _merge_patterns(merge_entities)
    if by_len:
        lengths = sorted(by_len, reverse=True)
        merged: list[str] = []
        i = 0
        while i < len(tokens):
            for length in lengths:
                if i + length <= len(tokens) and tuple(tokens[i:i + length]) in by_len[length]:
                    merged.append("_".join(tokens[i:i + length]))
                    i += length
                    break
            else:
                merged.append(tokens[i])
                i += 1
        tokens = merged
    return [t for t in tokens if t not in stopwords]


def tokenize_corpus(corpus: Corpus, stopwords: frozenset[str] | set[str] = frozenset()) -> int:
    """Tokenize every document in place, merging its own annotated entities.

    Returns the number of documents flagged for an empty token stream.
    Flagged documents stay in the corpus (they remain graph nodes) but are
    excluded from word-vector training windows.
    """
    flagged = 0
    for doc in corpus:
        doc.tokens = tokenize(doc.text, stopwords, corpus.entity_surfaces(doc.id))
        doc.flagged = not doc.tokens
        flagged += doc.flagged
    if flagged:
        logger.warning("%d documents have empty token streams", flagged)
    return flagged


def load_entities(path: str | Path, corpus: Corpus) -> dict[str, EntityAnnotation]:
    """Load entity annotations and join them to the corpus.

    Accepts a JSON array or JSONL of {"doc_id", "entities": {type: [str]}}.
    Records naming unknown doc ids are skipped with a warning; duplicates
    within one (doc, type) list are stored once. Documents without a record
    get an empty entity set.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"entities file not found: {path}")
    raw = path.read_text(encoding="utf-8").strip()
    if not raw:
        records = []
    elif raw.lstrip().startswith("["):
        try:
            records = json.loads(raw)
        except json.JSONDecodeError as e:
            raise DataError(f"malformed entities JSON: {e}") from e
        if not isinstance(records, list):
            raise DataError("entities JSON must be an array of records")
    else:
        records = []
        for lineno, line in enumerate(raw.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise DataError(f"malformed entities line {lineno}: {e}") from e

    annotations: dict[str, EntityAnnotation] = {}
    skipped = 0
    for rec in records:
        if not isinstance(rec, dict) or "doc_id" not in rec or "entities" not in rec:
            raise DataError("entity record needs 'doc_id' and 'entities' fields")
        doc_id = rec["doc_id"]
        if doc_id not in corpus.by_id:
            logger.warning("entity annotation for unknown doc id %r skipped", doc_id)
            skipped += 1
            continue
        ent_map = rec["entities"]
        if not isinstance(ent_map, dict):
            raise DataError(f"entities for doc {doc_id!r} must map type -> list")
        clean: dict[str, list[str]] = {}
        for etype, surfaces in ent_map.items():
            if not isinstance(surfaces, list):
                raise DataError(f"entities[{etype!r}] for doc {doc_id!r} must be a list")
            seen: list[str] = []
            for s in surfaces:
                if isinstance(s, str) and s.strip() and s not in seen:
                    seen.append(s)
            clean[etype] = seen
        if doc_id in annotations:
            # merge repeated records for the same doc
            for etype, surfaces in clean.items():
                have = annotations[doc_id].entities.setdefault(etype, [])
                for s in surfaces:
                    if s not in have:
                        have.append(s)
        else:
            annotations[doc_id] = EntityAnnotation(doc_id=doc_id, entities=clean)
    for doc in corpus:
        if doc.id not in annotations:
            annotations[doc.id] = EntityAnnotation(doc_id=doc.id, entities={})
    corpus.entities = annotations
    if skipped:
        logger.warning("%d entity records referenced unknown documents", skipped)
    return annotations


class Vocabulary:
    """Tokens retained at min_count, indexed by descending frequency.

    Ties are broken lexicographically; indices are contiguous from 0.
    """

    def __init__(self, counts: Counter, min_count: int):
        kept = [(t, c) for t, c in counts.items() if c >= min_count]
        if not kept:
            raise DataError(f"empty vocabulary at min_count={min_count}")
        kept.sort(key=lambda tc: (-tc[1], tc[0]))
        self.tokens = [t for t, _ in kept]
        self.index = {t: i for i, t in enumerate(self.tokens)}
        self.frequency = {t: c for t, c in kept}
        self.min_count = min_count

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index


def count_tokens(corpus: Corpus) -> Counter:
    counts: Counter = Counter()
    for doc in corpus:
        counts.update(doc.tokens)
    return counts


def build_vocabulary(corpus: Corpus, min_count: int = 10) -> Vocabulary:
    """Index tokens with corpus frequency >= min_count."""
    return Vocabulary(count_tokens(corpus), min_count)


def load_stopwords(source: str | Path) -> frozenset[str]:
    """Read a stopword list (one token per line, UTF-8, '#' comments).

    `builtin:en` and `builtin:fr` name the small shipped lists.
    """
    if isinstance(source, str) and source.startswith("builtin:"):
        lang = source.split(":", 1)[1]
        ref = importlib.resources.files("docgraph.data").joinpath(f"stopwords_{lang}.txt")
        try:
            raw = ref.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise DataError(f"no builtin stopword list for language {lang!r}") from None
    else:
        path = Path(source)
        if not path.exists():
            raise DataError(f"stopword file not found: {path}")
        raw = path.read_text(encoding="utf-8")
    words = set()
    for line in raw.splitlines():
        tok = line.strip()
        if tok and not tok.startswith("#"):
            words.add(normalize_text(tok))
    return frozenset(words)

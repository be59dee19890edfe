"""Document graphs from named-entity similarity, plus the KNN baseline.

Two documents get an edge when enough of their entity pairs are similar:
entity tokens are compared by cosine similarity of their word vectors
(identical tokens short-circuit to similarity 1.0 exactly), pairs at or above
sim_threshold count as links, and an edge forms once a document pair has at
least min_shared_links of them. The edge weight is the mean similarity over
those matched pairs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .corpus import entity_token
from .errors import ConfigError, DataError

logger = logging.getLogger(__name__)

_SIM_BLOCK = 512  # row block for pairwise-similarity scans


@dataclass
class GraphConfig:
    sim_threshold: float = 0.9
    min_shared_links: int = 3
    same_type_only: bool = True

    def __post_init__(self):
        if not 0.0 < self.sim_threshold <= 1.0:
            raise ConfigError(f"sim_threshold must be in (0, 1], got {self.sim_threshold}")
        if self.min_shared_links < 1:
            raise ConfigError(f"min_shared_links must be >= 1, got {self.min_shared_links}")


@dataclass(frozen=True)
class EntityMatch:
    doc_i: int
    doc_j: int
    entity_i: str
    entity_j: str
    similarity: float


class DocGraph:
    """Symmetric weighted document graph; edges stored once with i < j."""

    def __init__(self, n: int, edges: dict[tuple[int, int], float], kind: str):
        self.n = n
        self.kind = kind
        clean: dict[tuple[int, int], float] = {}
        for (i, j), w in edges.items():
            if i == j:
                raise DataError("self-loops are not stored in document graphs")
            if not (0 <= i < n and 0 <= j < n):
                raise DataError(f"edge ({i}, {j}) out of range for n={n}")
            if not np.isfinite(w) or w <= 0:
                raise DataError(f"edge ({i}, {j}) has invalid weight {w}")
            clean[(min(i, j), max(i, j))] = float(w)
        self.edges = dict(sorted(clean.items()))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric sparse adjacency (float64)."""
        if not self.edges:
            return sp.csr_matrix((self.n, self.n), dtype=np.float64)
        ii, jj, ww = [], [], []
        for (i, j), w in self.edges.items():
            ii += [i, j]
            jj += [j, i]
            ww += [w, w]
        return sp.csr_matrix((ww, (ii, jj)), shape=(self.n, self.n), dtype=np.float64)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg


def cosine_sim(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; raises on a zero vector."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DataError("cosine similarity undefined for a zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def _collect_typed_tokens(doc_entity_tokens, same_type_only: bool):
    """Map group key -> token -> sorted doc list; group = type or '*' when untyped."""
    groups: dict[str, dict[str, list[int]]] = {}
    for doc_idx, by_type in enumerate(doc_entity_tokens):
        if same_type_only:
            items = by_type.items()
        else:
            merged: dict[str, list[str]] = {"*": []}
            for toks in by_type.values():
                merged["*"].extend(toks)
            items = merged.items()
        for etype, tokens in items:
            token_docs = groups.setdefault(etype, {})
            for tok in dict.fromkeys(tokens):  # dedupe within (doc, group)
                docs = token_docs.setdefault(tok, [])
                if not docs or docs[-1] != doc_idx:
                    docs.append(doc_idx)
    return groups


def corpus_entity_tokens(corpus) -> list[dict[str, list[str]]]:
    """Per-document entity tokens by type, in corpus order.

    Surfaces are reduced to their normalized single-token form (multi-word
    names underscore-joined); surfaces with no word characters are dropped.
    """
    out = []
    for doc in corpus:
        ann = corpus.entities.get(doc.id)
        by_type: dict[str, list[str]] = {}
        if ann is not None:
            for etype, surfaces in ann.entities.items():
                toks = [t for t in (entity_token(s) for s in surfaces) if t]
                if toks:
                    by_type[etype] = toks
        out.append(by_type)
    return out


def entity_coverage(doc_entity_tokens, provider) -> dict[str, int]:
    """How many distinct entity tokens have vectors; OOV ones are unusable."""
    tokens = set()
    for by_type in doc_entity_tokens:
        for toks in by_type.values():
            tokens.update(toks)
    known = sum(1 for t in tokens if provider.vector(t) is not None)
    return {"total": len(tokens), "in_vocabulary": known,
            "out_of_vocabulary": len(tokens) - known}


class ExactTokenVectors:
    """One-hot vectors over a fixed token set: equal tokens match at 1, others at 0.

    Stands in for trained word vectors when only exact entity identity matters
    (synthetic corpora, string-match baselines).
    """

    def __init__(self, tokens):
        self.index = {t: i for i, t in enumerate(sorted(set(tokens)))}

    def vector(self, token: str) -> np.ndarray | None:
        i = self.index.get(token)
        if i is None:
            return None
        v = np.zeros(len(self.index), dtype=np.float64)
        v[i] = 1.0
        return v


def find_matches(doc_entity_tokens: list[dict[str, list[str]]], provider,
                 config: GraphConfig) -> list[EntityMatch]:
    """All cross-document entity pairs with similarity >= sim_threshold.

    doc_entity_tokens holds, per document (corpus order), a map from entity
    type to normalized entity tokens. Tokens without a vector are skipped
    (counted in a warning). Identical tokens match at exactly 1.0 without a
    cosine evaluation. Output is sorted by (doc_i, doc_j, entity_i, entity_j).
    """
    groups = _collect_typed_tokens(doc_entity_tokens, config.same_type_only)
    matches: list[EntityMatch] = []
    oov = set()

    for etype in sorted(groups):
        token_docs = groups[etype]
        tokens = sorted(token_docs)
        vecs = []
        kept = []
        for tok in tokens:
            v = provider.vector(tok)
            if v is None:
                oov.add(tok)
            else:
                vecs.append(np.asarray(v, dtype=np.float64))
                kept.append(tok)
        if not kept:
            continue
        mat = np.vstack(vecs)
        norms = np.linalg.norm(mat, axis=1)
        ok = norms > 0
        mat = mat[ok] / norms[ok, None]
        kept = [t for t, keep in zip(kept, ok) if keep]
        t_count = len(kept)

        # identical tokens: similarity 1.0 exactly, no cosine round-off
        for tok in kept:
            docs = token_docs[tok]
            for a in range(len(docs)):
                for b in range(a + 1, len(docs)):
                    matches.append(EntityMatch(docs[a], docs[b], tok, tok, 1.0))

        for start in range(0, t_count, _SIM_BLOCK):
            stop = min(start + _SIM_BLOCK, t_count)
            sims = mat[start:stop] @ mat.T
            rows, cols = np.nonzero(sims >= config.sim_threshold)
            for r, c in zip(rows, cols):
                a = start + r
                if c <= a:  # distinct token pairs once; a == c handled above
                    continue
                sim = float(np.clip(sims[r, c], -1.0, 1.0))
                tok_a, tok_b = kept[a], kept[c]
                for di in token_docs[tok_a]:
                    for dj in token_docs[tok_b]:
                        if di == dj:
                            continue
                        if di < dj:
                            matches.append(EntityMatch(di, dj, tok_a, tok_b, sim))
                        else:
                            matches.append(EntityMatch(dj, di, tok_b, tok_a, sim))

    if oov:
        logger.warning("%d entity tokens missing from vocabulary were skipped", len(oov))
    matches.sort(key=lambda m: (m.doc_i, m.doc_j, m.entity_i, m.entity_j))
    return matches


def build_ner_graph(matches: list[EntityMatch], config: GraphConfig, n: int) -> DocGraph:
    """Aggregate matches into the entity graph.

    A pair gets an edge when it has at least min_shared_links matches; the
    weight is the mean similarity over those matches. Every match counts,
    including repeated participation of one entity.
    """
    count: dict[tuple[int, int], int] = {}
    total: dict[tuple[int, int], float] = {}
    for m in matches:
        key = (m.doc_i, m.doc_j)
        count[key] = count.get(key, 0) + 1
        total[key] = total.get(key, 0.0) + m.similarity
    edges = {key: total[key] / c for key, c in count.items()
             if c >= config.min_shared_links}
    graph = DocGraph(n, edges, kind="ner")
    if not edges:
        logger.warning("entity graph is empty: %d isolated documents", n)
    return graph


def build_knn_graph(features, k_nn: int = 10) -> DocGraph:
    """Cosine k-nearest-neighbor graph, symmetrized by union.

    Weights are similarities clamped into (0, 1]. All-zero feature rows
    cannot be scored and stay isolated.
    """
    values = np.asarray(features.values, dtype=np.float64)
    n = values.shape[0]
    if not 1 <= k_nn <= n - 1:
        raise ConfigError(f"k_nn must be in [1, n-1]=[1, {n - 1}], got {k_nn}")
    norms = np.linalg.norm(values, axis=1)
    zero_rows = np.nonzero(norms == 0)[0]
    if len(zero_rows):
        logger.warning("%d all-zero feature rows stay isolated in the KNN graph",
                       len(zero_rows))
    unit = np.zeros_like(values)
    nz = norms > 0
    unit[nz] = values[nz] / norms[nz, None]
    edges: dict[tuple[int, int], float] = {}
    for i in range(n):
        if not nz[i]:
            continue
        sims = unit @ unit[i]
        sims[i] = -np.inf
        sims[~nz] = -np.inf
        order = np.argsort(-sims, kind="stable")[:k_nn]
        for j in order:
            if sims[j] == -np.inf:
                continue
            w = float(min(max(sims[j], 1e-12), 1.0))
            edges[(min(i, int(j)), max(i, int(j)))] = w
    return DocGraph(n, edges, kind="knn")


@dataclass
class GraphStats:
    nodes: int
    edges: int
    isolates: int
    mean_degree: float
    components: int


def graph_stats(g: DocGraph) -> GraphStats:
    deg = g.degrees()
    n_comp, _ = connected_components(g.adjacency(), directed=False)
    return GraphStats(
        nodes=g.n,
        edges=g.n_edges,
        isolates=int(np.sum(deg == 0)),
        mean_degree=float(deg.mean()) if g.n else 0.0,
        components=int(n_comp),
    )


def save_graph(g: DocGraph, path: str | Path) -> None:
    """Text edge list: header 'n kind', then 'i j weight' at 9 significant digits."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{g.n} {g.kind}\n")
        for (i, j), w in g.edges.items():
            f.write(f"{i} {j} {w:.9g}\n")


def load_graph(path: str | Path) -> DocGraph:
    path = Path(path)
    if not path.exists():
        raise DataError(f"graph file not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise DataError(f"empty graph file: {path}")
    head = lines[0].split()
    if len(head) != 2:
        raise DataError(f"bad graph header: {lines[0]!r}")
    n = int(head[0])
    kind = head[1]
    edges: dict[tuple[int, int], float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise DataError(f"bad graph edge at line {lineno}: {line!r}")
        edges[(int(parts[0]), int(parts[1]))] = float(parts[2])
    return DocGraph(n, edges, kind=kind)

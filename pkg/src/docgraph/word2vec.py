"""CBOW word vectors with negative sampling, trained with plain numpy.

Used to score similarity between named-entity tokens. Context vectors are
averaged (true mean, with the matching 1/|context| gradient), negatives are
drawn from the unigram distribution raised to 0.75, and the learning rate
decays linearly over all training windows. Single-threaded training is
bit-reproducible for a fixed seed; the optional multi-worker mode updates
shared weight tables without locks and trades determinism for throughput.
"""

from __future__ import annotations

import logging
import struct
import threading
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .corpus import Corpus, Vocabulary, build_vocabulary
from .errors import ConfigError, DataError

logger = logging.getLogger(__name__)

MAGIC = b"DGWV"
VERSION = 1


@dataclass
class W2vConfig:
    dim: int = 500
    window: int = 5
    min_count: int = 10
    epochs: int = 20
    negative_samples: int = 5
    initial_lr: float = 0.025
    final_lr: float = 1e-4
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError(f"dim must be >= 1, got {self.dim}")
        if self.window < 1:
            raise ConfigError(f"window must be >= 1, got {self.window}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.negative_samples < 1:
            raise ConfigError(f"negative_samples must be >= 1, got {self.negative_samples}")
        if self.min_count < 1:
            raise ConfigError(f"min_count must be >= 1, got {self.min_count}")
        if not 0 < self.final_lr <= self.initial_lr:
            raise ConfigError("need 0 < final_lr <= initial_lr")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")


class WordVectors:
    """Trained token -> vector map; float32 input vectors, one row per token."""

    def __init__(self, vocab: Vocabulary, vectors: np.ndarray,
                 output_vectors: np.ndarray | None = None,
                 loss_per_epoch: list[float] | None = None):
        if vectors.shape[0] != len(vocab):
            raise ValueError("vector row count != vocabulary size")
        if not np.isfinite(vectors).all():
            raise DataError("word vectors contain non-finite entries")
        self.vocab = vocab
        self.vectors = np.ascontiguousarray(vectors, dtype=np.float32)
        self.output_vectors = output_vectors  # training-only, not persisted
        self.loss_per_epoch = loss_per_epoch or []

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def vector(self, token: str) -> np.ndarray | None:
        """Input vector for an in-vocabulary token, else None."""
        idx = self.vocab.index.get(token)
        return None if idx is None else self.vectors[idx]

    def similarity(self, a: str, b: str) -> float | None:
        """Cosine similarity of two in-vocabulary tokens, else None."""
        u, v = self.vector(a), self.vector(b)
        if u is None or v is None:
            return None
        return float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))


def noise_distribution(vocab: Vocabulary, power: float = 0.75) -> np.ndarray:
    """Negative-sampling distribution: unigram frequencies ** power, renormalized."""
    freqs = np.array([vocab.frequency[t] for t in vocab.tokens], dtype=np.float64)
    weights = freqs ** power
    return weights / weights.sum()


def _window_loss_grads(vin: np.ndarray, vout: np.ndarray, ctx: np.ndarray,
                       target: int, negatives: np.ndarray):
    """Loss and analytic gradients for one CBOW window.

    loss = -log sigmoid(h.u_t) - sum_j log sigmoid(-h.u_nj) with h the mean
    of the context input vectors. Returns (loss, grad_in, out_rows, grad_out)
    where grad_in applies to every row in ctx and grad_out row-wise to
    out_rows = [target, negatives...].
    """
    h = vin[ctx].mean(axis=0)
    out_rows = np.concatenate(([target], negatives))
    u = vout[out_rows]
    s = u @ h
    loss = float(np.logaddexp(0.0, -s[0]) + np.logaddexp(0.0, s[1:]).sum())
    g = expit(s)
    g[0] -= 1.0
    grad_out = g[:, None] * h[None, :]
    grad_in = (g @ u) / len(ctx)
    return loss, grad_in, out_rows, grad_out


def _sample_negatives(cum_table: np.ndarray, target: int, count: int,
                      rng: np.random.Generator) -> np.ndarray:
    negs = np.empty(count, dtype=np.int64)
    filled = 0
    while filled < count:
        draw = np.searchsorted(cum_table, rng.random(count - filled), side="right")
        draw = draw[draw != target]
        negs[filled:filled + len(draw)] = draw
        filled += len(draw)
    return negs


def _doc_streams(corpus: Corpus, vocab: Vocabulary) -> list[np.ndarray]:
    """In-vocabulary token index streams; docs with < 2 retained tokens yield none."""
    streams = []
    for doc in corpus:
        if doc.flagged:
            continue
        ids = [vocab.index[t] for t in doc.tokens if t in vocab.index]
        if len(ids) >= 2:
            streams.append(np.asarray(ids, dtype=np.int64))
    return streams


def _train_stream(streams, vin, vout, cum_table, config, rng,
                  lr_state, total_windows, loss_acc):
    """One epoch pass over the given document streams (in-place updates)."""
    window = config.window
    n_neg = config.negative_samples
    lr_span = config.initial_lr - config.final_lr
    epoch_loss = 0.0
    n_windows = 0
    for stream in streams:
        length = len(stream)
        for pos in range(length):
            lo = max(0, pos - window)
            hi = min(length, pos + window + 1)
            ctx = np.concatenate((stream[lo:pos], stream[pos + 1:hi]))
            if len(ctx) == 0:
                continue
            target = int(stream[pos])
            negatives = _sample_negatives(cum_table, target, n_neg, rng)
            lr = config.initial_lr - lr_span * (lr_state[0] / total_windows)
            lr = max(lr, config.final_lr)
            lr_state[0] += 1
            loss, grad_in, out_rows, grad_out = _window_loss_grads(
                vin, vout, ctx, target, negatives)
            np.add.at(vout, out_rows, -lr * grad_out)
            np.add.at(vin, ctx, -lr * grad_in)
            epoch_loss += loss
            n_windows += 1
    loss_acc.append((epoch_loss, n_windows))


def train_cbow(corpus: Corpus, config: W2vConfig,
               vocab: Vocabulary | None = None) -> WordVectors:
    """Train CBOW vectors over the tokenized corpus.

    The vocabulary defaults to tokens with frequency >= config.min_count.
    Raises DataError when no document yields a training window.
    """
    if vocab is None:
        vocab = build_vocabulary(corpus, config.min_count)
    streams = _doc_streams(corpus, vocab)
    windows_per_epoch = sum(len(s) for s in streams)
    if windows_per_epoch == 0:
        raise DataError("no training windows: every document has < 2 retained tokens")
    total_windows = windows_per_epoch * config.epochs

    rng = np.random.default_rng(config.seed)
    size = len(vocab)
    vin = (rng.random((size, config.dim)) - 0.5) / config.dim
    vout = np.zeros((size, config.dim), dtype=np.float64)
    cum_table = np.cumsum(noise_distribution(vocab))
    cum_table[-1] = 1.0  # guard against rounding in searchsorted

    loss_per_epoch: list[float] = []
    lr_state = [0]
    for epoch in range(config.epochs):
        acc: list[tuple[float, int]] = []
        if config.workers == 1:
            _train_stream(streams, vin, vout, cum_table, config, rng,
                          lr_state, total_windows, acc)
        else:
            # lock-free parallel mode: worker threads update shared tables;
            # results depend on scheduling
            chunks = [streams[i::config.workers] for i in range(config.workers)]
            threads = []
            for w, chunk in enumerate(chunks):
                wrng = np.random.default_rng([config.seed, epoch, w])
                t = threading.Thread(
                    target=_train_stream,
                    args=(chunk, vin, vout, cum_table, config, wrng,
                          lr_state, total_windows, acc))
                threads.append(t)
                t.start()
            for t in threads:
                t.join()
        total_loss = sum(x for x, _ in acc)
        count = sum(c for _, c in acc)
        loss_per_epoch.append(total_loss / max(count, 1))
        logger.debug("epoch %d mean loss %.6f", epoch + 1, loss_per_epoch[-1])

    return WordVectors(vocab, vin.astype(np.float32), output_vectors=vout,
                       loss_per_epoch=loss_per_epoch)


def save_vectors(wv: WordVectors, path: str | Path) -> None:
    """Write the binary vector file: header, vocabulary table, float32 matrix."""
    path = Path(path)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<HHII", VERSION, 0, len(wv.vocab), wv.dim))
        for token in wv.vocab.tokens:
            raw = token.encode("utf-8")
            f.write(struct.pack("<HQ", len(raw), wv.vocab.frequency[token]))
            f.write(raw)
        f.write(np.ascontiguousarray(wv.vectors, dtype="<f4").tobytes())


def load_vectors(path: str | Path) -> WordVectors:
    """Read a vector file written by save_vectors; bit-exact round trip."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"vector file not found: {path}")
    data = path.read_bytes()

    def need(offset: int, count: int) -> None:
        if offset + count > len(data):
            raise DataError(f"truncated vector file {path} at byte offset {offset}")

    need(0, 4 + 12)
    if data[:4] != MAGIC:
        raise DataError(f"bad magic in vector file {path} at byte offset 0")
    version, _flags, size, dim = struct.unpack_from("<HHII", data, 4)
    if version != VERSION:
        raise DataError(f"unsupported vector file version {version} at byte offset 4")
    offset = 16
    counts: Counter = Counter()
    order: list[str] = []
    for _ in range(size):
        need(offset, 10)
        tok_len, freq = struct.unpack_from("<HQ", data, offset)
        offset += 10
        need(offset, tok_len)
        token = data[offset:offset + tok_len].decode("utf-8")
        offset += tok_len
        counts[token] = freq
        order.append(token)
    need(offset, size * dim * 4)
    matrix = np.frombuffer(data, dtype="<f4", count=size * dim,
                           offset=offset).reshape(size, dim).copy()
    vocab = Vocabulary(counts, min_count=1)
    if vocab.tokens != order:
        raise DataError(f"vector file {path}: vocabulary table out of order")
    return WordVectors(vocab, matrix)

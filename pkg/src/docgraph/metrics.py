"""External clustering evaluation: accuracy, NMI, and adjusted Rand index.

All three scores are invariant to relabeling of either partition. Accuracy
maximizes label agreement over cluster-to-class matchings via an exact
assignment solve; NMI and ARI come straight from the contingency table.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DataError

NMI_NORMS = ("arithmetic", "min", "max", "geometric")


def canonicalize(labels: Sequence[int]) -> list[int]:
    """Relabel to contiguous ids 0..k-1 in order of first appearance."""
    mapping: dict = {}
    out = []
    for lab in labels:
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out.append(mapping[lab])
    return out


def _check_pair(pred: Sequence[int], truth: Sequence[int]) -> int:
    if len(pred) != len(truth):
        raise DataError(
            f"partition length mismatch: {len(pred)} predicted vs {len(truth)} true"
        )
    if len(pred) == 0:
        raise DataError("empty partitions")
    return len(pred)


def contingency(pred: Sequence[int], truth: Sequence[int]) -> np.ndarray:
    """Contingency matrix, rows = predicted clusters, cols = true classes."""
    _check_pair(pred, truth)
    p = canonicalize(pred)
    t = canonicalize(truth)
    table = np.zeros((max(p) + 1, max(t) + 1), dtype=np.int64)
    for i, j in zip(p, t):
        table[i, j] += 1
    return table


def accuracy(pred: Sequence[int], truth: Sequence[int]) -> float:
    """Best label-agreement fraction over all cluster-to-class matchings.

    Solved exactly as a rectangular assignment problem on the contingency
    matrix, so predicted-cluster permutations never hurt the score.
    """
    n = _check_pair(pred, truth)
    table = contingency(pred, truth)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / n


def nmi(pred: Sequence[int], truth: Sequence[int], norm: str = "arithmetic") -> float:
    """Normalized mutual information in [0, 1].

    Mutual information uses natural logs; the normalizer (arithmetic mean of
    the two entropies by default; "min"/"max"/"geometric" also accepted) makes
    the value base-free. If both partitions are single-cluster the score is 1;
    if only one is, it is 0.
    """
    n = _check_pair(pred, truth)
    if norm not in NMI_NORMS:
        raise DataError(f"unknown NMI normalization {norm!r}; expected one of {NMI_NORMS}")
    table = contingency(pred, truth)
    pi = table.sum(axis=1) / n
    pj = table.sum(axis=0) / n
    h_pred = float(-np.sum(pi * np.log(pi, where=pi > 0, out=np.zeros_like(pi))))
    h_truth = float(-np.sum(pj * np.log(pj, where=pj > 0, out=np.zeros_like(pj))))
    nz = table > 0
    pij = table[nz] / n
    outer = np.outer(pi, pj)[nz]
    mi = float(np.sum(pij * np.log(pij / outer)))
    if norm == "arithmetic":
        denom = 0.5 * (h_pred + h_truth)
    elif norm == "min":
        denom = min(h_pred, h_truth)
    elif norm == "max":
        denom = max(h_pred, h_truth)
    else:
        denom = math.sqrt(h_pred * h_truth)
    if denom <= 0.0:
        return 1.0 if h_pred == h_truth == 0.0 else 0.0
    return max(0.0, min(1.0, mi / denom))


def ari(pred: Sequence[int], truth: Sequence[int]) -> float:
    """Adjusted Rand index in [-0.5, 1] via pair counting.

    Chance-corrected: the expected index of independent partitions is 0.
    """
    n = _check_pair(pred, truth)
    if n < 2:
        return 1.0
    joint = Counter(zip(pred, truth))
    rows = Counter(pred)
    cols = Counter(truth)
    index = sum(c * (c - 1) for c in joint.values()) // 2
    a = sum(c * (c - 1) for c in rows.values()) // 2
    b = sum(c * (c - 1) for c in cols.values()) // 2
    total = n * (n - 1) // 2
    expected = a * b / total
    max_index = 0.5 * (a + b)
    if max_index == expected:
        # both partitions all-singletons or both single-cluster: identical pair structure
        return 1.0
    return (index - expected) / (max_index - expected)


def evaluate(pred: Sequence[int], truth: Sequence[int]) -> dict[str, float]:
    """ACC/NMI/ARI rounded to 4 decimal places."""
    return {
        "acc": round(accuracy(pred, truth), 4),
        "nmi": round(nmi(pred, truth), 4),
        "ari": round(ari(pred, truth), 4),
    }


def format_table(scores: dict[str, float], percent: bool = False) -> str:
    """Two-line human-readable metric table; percent=True scales by 100."""
    names = ["acc", "nmi", "ari"]
    scale = 100.0 if percent else 1.0
    header = "  ".join(f"{name.upper():>8}" for name in names)
    values = "  ".join(f"{scores[name] * scale:8.4f}" if not percent
                       else f"{scores[name] * scale:8.2f}" for name in names)
    return header + "\n" + values

"""Feature propagation over a document graph.

The operator is a row-stochastic smoothing matrix built from the
self-loop-augmented, symmetrically normalized adjacency:

    A_hat = A + I
    S = D_hat^{-1/2} A_hat D_hat^{-1/2}
    T = D_T^{-1} (I + S)

where D_hat is the degree matrix of A_hat and D_T re-normalizes the rows of
I + S to sum to one. Applying T p times mixes each document's features with
its neighborhood at increasing radius. Isolated nodes reduce to T row = e_i,
so their features pass through unchanged.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .entity_graph import DocGraph
from .errors import ConfigError, NumericalError
from .features import FeatureMatrix


class Propagator:
    """Row-stochastic propagation operator stored as CSR."""

    def __init__(self, matrix: sp.csr_matrix):
        if matrix.shape[0] != matrix.shape[1]:
            raise ConfigError(f"propagator must be square, got {matrix.shape}")
        self.matrix = matrix.tocsr()
        rows = np.asarray(self.matrix.sum(axis=1)).ravel()
        if not np.allclose(rows, 1.0, atol=1e-9):
            raise NumericalError("propagator rows do not sum to 1")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def apply(self, values: np.ndarray, power: int) -> np.ndarray:
        """T^power @ values by repeated sparse-dense products."""
        if power < 0:
            raise ConfigError(f"power must be >= 0, got {power}")
        out = np.array(values, dtype=np.float64)  # copy: power 0 must not alias
        if out.shape[0] != self.n:
            raise ConfigError(f"values have {out.shape[0]} rows, expected {self.n}")
        for _ in range(power):
            out = self.matrix @ out
        if not np.all(np.isfinite(out)):
            raise NumericalError("propagation produced non-finite values")
        return out


def build_propagator(graph: DocGraph) -> Propagator:
    """Normalized smoothing operator for a document graph."""
    adj = graph.adjacency()
    n = graph.n
    if n == 0:
        raise ConfigError("cannot build a propagator for an empty graph")
    a_hat = adj + sp.identity(n, format="csr", dtype=np.float64)
    deg = np.asarray(a_hat.sum(axis=1)).ravel()
    inv_sqrt = 1.0 / np.sqrt(deg)  # deg >= 1 from the self loop
    d_half = sp.diags(inv_sqrt)
    s_mat = d_half @ a_hat @ d_half
    t_raw = sp.identity(n, format="csr", dtype=np.float64) + s_mat
    row_sums = np.asarray(t_raw.sum(axis=1)).ravel()
    t_mat = sp.diags(1.0 / row_sums) @ t_raw
    return Propagator(t_mat.tocsr())


def propagate(graph: DocGraph, features: FeatureMatrix, power: int) -> FeatureMatrix:
    """Smooth features over the graph: returns T^power X with the same ids."""
    if graph.n != len(features.ids):
        raise ConfigError(
            f"graph has {graph.n} nodes but features have {len(features.ids)} rows")
    prop = build_propagator(graph)
    smoothed = prop.apply(features.values, power)
    return FeatureMatrix(ids=list(features.ids), values=smoothed, kind=features.kind)

"""Node projection, noise-node rejection and signal-network extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import WeightedGraph, giant_component, strip_leaves
from .nullmodels import NullEnsemble
from .spectral import SpectralEstimate, extreme_eigenpairs

LAMBDA = "lambda"
SQRT_LAMBDA = "sqrt"


class RejectionError(ValueError):
    pass


def _weights(values: np.ndarray, weighting: str) -> np.ndarray:
    values = np.abs(np.asarray(values, dtype=float))
    if weighting == LAMBDA:
        return values
    if weighting == SQRT_LAMBDA:
        return np.sqrt(values)
    raise RejectionError(f"unknown weighting {weighting!r}")


def embed(values, vectors, weighting: str = LAMBDA) -> np.ndarray:
    """Eigenvectors as columns scaled by ``|lambda|`` (or its square root)."""
    return np.asarray(vectors, dtype=float) * _weights(values, weighting)


def project_nodes(estimate: SpectralEstimate, d: int | None = None,
                  weighting: str = LAMBDA) -> np.ndarray:
    """Node coordinates in the space of the ``d`` leading retained eigenvectors."""
    d = estimate.d_pos if d is None else d
    if d < 1:
        raise RejectionError("no retained dimensions to project onto")
    if d > estimate.d_pos:
        raise RejectionError(f"d={d} exceeds the {estimate.d_pos} retained dimensions")
    return embed(estimate.data_eigenvalues[:d], estimate.data_eigenvectors[:, :d], weighting)


def node_norms(projection: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.asarray(projection, dtype=float) ** 2, axis=1))


def expected_norms(ensemble: NullEnsemble, d: int, expectation: np.ndarray | None = None,
                   negative: bool = False, weighting: str = LAMBDA,
                   jobs: int | None = None) -> np.ndarray:
    """Mean per-node norm over the samples, each projected on its own top-``d`` eigenpairs."""
    if d < 1:
        raise RejectionError("d must be at least 1")
    P = ensemble.expectation if expectation is None else expectation

    def one(S):
        vals, vecs = extreme_eigenpairs(S - P, d, largest=not negative)
        return node_norms(embed(vals, vecs, weighting))

    norms = ensemble.map(one, jobs)
    total = np.zeros(ensemble.graph.n)
    for row in norms:
        total += row
    return total / len(norms)


def reject_nodes(data_norms, expected) -> tuple[np.ndarray, np.ndarray]:
    """Split node indices into retained (norm strictly above expected) and rejected."""
    keep = np.asarray(data_norms) > np.asarray(expected)
    return np.flatnonzero(keep), np.flatnonzero(~keep)


def signal_network(g: WeightedGraph, retained) -> WeightedGraph:
    """Retained nodes, leaf-stripped, largest component; may be empty."""
    retained = list(retained)
    if not retained:
        return WeightedGraph.empty()
    sub = strip_leaves(g.subgraph(retained))
    return giant_component(sub) if sub.n else sub


@dataclass
class SignalDecomposition:
    projection: np.ndarray
    data_norms: np.ndarray
    expected_norms: np.ndarray
    retained: np.ndarray
    rejected: np.ndarray
    signal_graph: WeightedGraph

    def signal_indices(self, g: WeightedGraph) -> np.ndarray:
        """Indices into ``g`` of the signal-network nodes."""
        return np.array([g.index_of(x) for x in self.signal_graph.node_labels], dtype=int)


def decompose(g: WeightedGraph, estimate: SpectralEstimate, ensemble: NullEnsemble,
              weighting: str = LAMBDA, jobs: int | None = None) -> SignalDecomposition:
    """Project on the retained dimensions, reject noise nodes, extract the signal network."""
    d = estimate.d_pos
    proj = project_nodes(estimate, d, weighting)
    L = node_norms(proj)
    expected = expected_norms(ensemble, d, weighting=weighting, jobs=jobs)
    retained, rejected = reject_nodes(L, expected)
    return SignalDecomposition(proj, L, expected, retained, rejected,
                               signal_network(g, retained))


@dataclass
class KPartiteResult:
    negative_values: np.ndarray
    negative_vectors: np.ndarray
    data_norms: np.ndarray
    expected_norms: np.ndarray
    retained_nodes: np.ndarray
    groups: dict[int, int] | None  # node index -> 0 (nonnegative entry) / 1 (negative)


def kpartite_extract(estimate: SpectralEstimate, ensemble: NullEnsemble,
                     weighting: str = LAMBDA, jobs: int | None = None) -> KPartiteResult:
    """Rejection on the eigenvectors below the lower bound, plus a sign split when there is one.

    With more than one such eigenvector only the projection and the retained
    nodes are returned (``groups`` is None).
    """
    d = estimate.d_neg
    if d < 1:
        raise RejectionError("no eigenvalues below the lower bound")
    vals, vecs = estimate.negative_values, estimate.negative_vectors
    L = node_norms(embed(vals, vecs, weighting))
    expected = expected_norms(ensemble, d, negative=True, weighting=weighting, jobs=jobs)
    retained, _ = reject_nodes(L, expected)
    groups = None
    if d == 1:
        groups = {int(i): int(vecs[i, 0] < 0) for i in retained}
    return KPartiteResult(vals, vecs, L, expected, retained, groups)

"""Weighted undirected graphs: representation, edge-list I/O and structural utilities."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence, TextIO

import numpy as np
from scipy.sparse import csgraph, csr_matrix

BINARY = "binary"
INTEGER = "integer"
REAL = "real"


class GraphError(ValueError):
    pass


class EdgeListError(GraphError):
    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


def infer_granularity(values: np.ndarray) -> str:
    values = np.asarray(values, dtype=float)
    if values.size == 0 or np.all((values == 0) | (values == 1)):
        return BINARY
    if np.all(values == np.round(values)):
        return INTEGER
    return REAL


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Symmetric, nonnegative, zero-diagonal weight matrix with unique node labels.

    The weight matrix is stored read-only; derived quantities (strengths,
    degrees, link counts) are computed from it on demand.
    """

    node_labels: tuple[str, ...]
    weights: np.ndarray
    weight_granularity: str = field(default="")

    def __post_init__(self):
        W = np.array(self.weights, dtype=float)
        labels = tuple(str(x) for x in self.node_labels)
        n = len(labels)
        if W.shape != (n, n):
            raise GraphError(f"weight matrix shape {W.shape} does not match {n} labels")
        if len(set(labels)) != n:
            raise GraphError("node labels must be unique")
        if n and not np.array_equal(W, W.T):
            raise GraphError("weight matrix must be symmetric")
        if n and np.any(np.diag(W) != 0):
            raise GraphError("self-loops are not allowed")
        if np.any(W < 0) or not np.all(np.isfinite(W)):
            raise GraphError("weights must be finite and nonnegative")
        W.setflags(write=False)
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "node_labels", labels)
        if not self.weight_granularity:
            object.__setattr__(self, "weight_granularity", infer_granularity(W[W > 0]))
        elif self.weight_granularity not in (BINARY, INTEGER, REAL):
            raise GraphError(f"unknown weight granularity {self.weight_granularity!r}")

    @classmethod
    def from_matrix(cls, weights, labels: Sequence[str] | None = None) -> "WeightedGraph":
        W = np.asarray(weights, dtype=float)
        if labels is None:
            labels = [str(i) for i in range(W.shape[0])]
        return cls(tuple(labels), W)

    @classmethod
    def empty(cls) -> "WeightedGraph":
        return cls((), np.zeros((0, 0)))

    @property
    def n(self) -> int:
        return len(self.node_labels)

    def __len__(self) -> int:
        return self.n

    @property
    def adjacency(self) -> np.ndarray:
        return (self.weights > 0).astype(float)

    @property
    def strengths(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    @property
    def degrees(self) -> np.ndarray:
        return (self.weights > 0).sum(axis=1)

    @property
    def num_links(self) -> int:
        """Number of unique undirected links ``m``."""
        return int(np.count_nonzero(np.triu(self.weights, 1)))

    @property
    def num_entries(self) -> int:
        """Number of nonzero matrix entries (twice the unique links)."""
        return int(np.count_nonzero(self.weights))

    @property
    def total_weight(self) -> float:
        """Sum of unique link weights, half the total strength."""
        return float(np.triu(self.weights, 1).sum())

    @property
    def density(self) -> float:
        if self.n < 2:
            return 0.0
        return self.num_entries / (self.n * (self.n - 1))

    def index_of(self, label: str) -> int:
        return self.node_labels.index(label)

    def subgraph(self, nodes: Iterable[int]) -> "WeightedGraph":
        """Induced subgraph on ``nodes`` (indices), kept in ascending index order."""
        idx = np.array(sorted(set(int(i) for i in nodes)), dtype=int)
        if idx.size == 0:
            return WeightedGraph.empty()
        labels = tuple(self.node_labels[i] for i in idx)
        return WeightedGraph(labels, self.weights[np.ix_(idx, idx)],
                             self.weight_granularity)

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (self.node_labels == other.node_labels
                and np.array_equal(self.weights, other.weights))

    def __repr__(self):
        return (f"WeightedGraph(n={self.n}, links={self.num_links}, "
                f"granularity={self.weight_granularity!r})")


def _parse_weight(token: str, line_number: int) -> float:
    try:
        w = float(token)
    except ValueError:
        raise EdgeListError(f"weight {token!r} is not a number", line_number) from None
    if not np.isfinite(w):
        raise EdgeListError(f"weight {token!r} is not finite", line_number)
    if w < 0:
        raise EdgeListError(f"negative weight {token!r}", line_number)
    return w


def load_edge_list(source: TextIO | str, directed_symmetrize: bool = False) -> WeightedGraph:
    """Read a ``src dst weight`` edge list.

    Fields are separated by tabs or whitespace; blank lines and lines starting
    with ``#`` are skipped. Nodes are indexed in order of first appearance.
    Repeating an undirected pair with the same weight is harmless; repeating it
    with a different weight is an error. With ``directed_symmetrize`` each line
    is a directed edge and the result is ``(W + W.T) / 2``.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    index: dict[str, int] = {}
    edges: dict[tuple[int, int], float] = {}
    for line_number, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise EdgeListError(f"expected 3 fields, found {len(parts)}", line_number)
        a, b, wtoken = parts
        w = _parse_weight(wtoken, line_number)
        if a == b:
            raise EdgeListError(f"self-loop on node {a!r}", line_number)
        i = index.setdefault(a, len(index))
        j = index.setdefault(b, len(index))
        key = (i, j) if directed_symmetrize else (min(i, j), max(i, j))
        if key in edges and edges[key] != w:
            raise EdgeListError(
                f"conflicting weights {edges[key]!r} and {w!r} for pair ({a}, {b})",
                line_number)
        edges[key] = w

    n = len(index)
    W = np.zeros((n, n))
    for (i, j), w in edges.items():
        W[i, j] = w
        if not directed_symmetrize:
            W[j, i] = w
    if directed_symmetrize:
        W = (W + W.T) / 2
    labels = sorted(index, key=index.get)
    return WeightedGraph(tuple(labels), W)


def _format_weight(w: float) -> str:
    if w == int(w):
        return str(int(w))
    return repr(float(w))


def write_edge_list(g: WeightedGraph, stream: TextIO) -> None:
    """Write each unique link once as ``src<TAB>dst<TAB>weight``."""
    rows, cols = np.nonzero(np.triu(g.weights, 1))
    for i, j in zip(rows, cols):
        stream.write(f"{g.node_labels[i]}\t{g.node_labels[j]}\t"
                     f"{_format_weight(g.weights[i, j])}\n")


def edge_list_string(g: WeightedGraph) -> str:
    buf = io.StringIO()
    write_edge_list(g, buf)
    return buf.getvalue()


def load_les_miserables() -> WeightedGraph:
    """Bundled Les Miserables character co-appearance network."""
    text = resources.files("netspectra.data").joinpath("lesmis.tsv").read_text("utf-8")
    return load_edge_list(text)


def components(g: WeightedGraph) -> list[np.ndarray]:
    """Connected components, largest first; ties ordered by lowest node index."""
    if g.n == 0:
        return []
    _, labels = csgraph.connected_components(csr_matrix(g.weights > 0), directed=False)
    comps = [np.flatnonzero(labels == c) for c in np.unique(labels)]
    return sorted(comps, key=lambda c: (-c.size, c[0]))


def giant_component(g: WeightedGraph) -> WeightedGraph:
    if g.n == 0:
        raise GraphError("graph has no nodes")
    comps = components(g)
    if comps[0].size == g.n:
        return g
    return g.subgraph(comps[0])


def strip_leaves(g: WeightedGraph) -> WeightedGraph:
    """Remove degree-1 nodes until none remain, then keep the largest component.

    A largest component without any links (an isolated node) counts as empty.
    """
    keep = np.ones(g.n, dtype=bool)
    A = g.weights > 0
    while True:
        deg = A[np.ix_(keep, keep)].sum(axis=1)
        leaves = np.flatnonzero(keep)[deg == 1]
        if leaves.size == 0:
            break
        keep[leaves] = False
    stripped = g.subgraph(np.flatnonzero(keep))
    if stripped.n == 0 or stripped.num_links == 0:
        return WeightedGraph.empty()
    return giant_component(stripped)


@dataclass(frozen=True)
class WeightDistributionSummary:
    weight_value: int
    observed_count: int
    cumulative_fraction: float


def integer_weights(g: WeightedGraph, kappa: float = 1.0) -> np.ndarray:
    """Unique link weights as integers, after scaling real weights by ``kappa``."""
    w = g.weights[np.triu_indices(g.n, 1)]
    w = w[w > 0]
    if g.weight_granularity == REAL:
        if kappa == 1:
            raise GraphError("real-valued weights need a kappa scaling before counting")
        w = np.round(w * kappa)
        w = w[w > 0]
    return w.astype(np.int64)


def weight_counts(values: np.ndarray) -> dict[int, int]:
    vals, counts = np.unique(np.asarray(values, dtype=np.int64), return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, counts)}


def weight_distribution(g: WeightedGraph, kappa: float = 1.0) -> list[WeightDistributionSummary]:
    """Counts and empirical CDF of the unique link weights."""
    counts = weight_counts(integer_weights(g, kappa))
    total = sum(counts.values())
    out = []
    running = 0
    for value in sorted(counts):
        running += counts[value]
        out.append(WeightDistributionSummary(value, counts[value], running / total))
    return out


def count_difference(data: dict[int, int], model: dict[int, int]) -> dict[int, int]:
    """Per-weight difference ``model - data`` over the union of observed weights."""
    keys = sorted(set(data) | set(model))
    return {k: model.get(k, 0) - data.get(k, 0) for k in keys}

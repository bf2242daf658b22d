"""Community detection against an arbitrary null-model expectation.

All quality scores use the comparison matrix ``C = W - <P>``; the modularity
of a partition is ``Tr(S^T C S)`` for the group-indicator matrix ``S``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csgraph, csr_matrix

from .graph import WeightedGraph
from .nullmodels import sample_rng
from .spectral import eig_symmetric

log = logging.getLogger(__name__)

_KMEANS_STREAM = 0x4B4D
_CONSENSUS_STREAM = 0xC0C0
_LOUVAIN_STREAM = 0x1011
_MULTIWAY_STREAM = 0x3A11


class PartitionError(ValueError):
    pass


def relabel(labels) -> np.ndarray:
    """Map group labels to 0..c-1 in order of first appearance."""
    labels = np.asarray(labels)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty_like(first)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size)
    return rank[inverse].astype(int)


@dataclass
class Partition:
    assignment: np.ndarray
    quality: float = float("nan")
    converged: bool = True

    def __post_init__(self):
        self.assignment = relabel(self.assignment)

    @property
    def num_groups(self) -> int:
        return int(self.assignment.max()) + 1 if self.assignment.size else 0

    def groups(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.assignment == c) for c in range(self.num_groups)]

    def __len__(self):
        return self.assignment.size


def indicator(labels) -> np.ndarray:
    labels = relabel(labels)
    S = np.zeros((labels.size, labels.max() + 1 if labels.size else 0))
    S[np.arange(labels.size), labels] = 1.0
    return S


def modularity_from_comparison(C: np.ndarray, labels) -> float:
    labels = np.asarray(labels)
    if labels.size != C.shape[0]:
        raise PartitionError(f"{labels.size} labels for {C.shape[0]} nodes")
    S = indicator(labels)
    return float(np.trace(S.T @ C @ S))


def modularity(g: WeightedGraph, expectation: np.ndarray, part: Partition | np.ndarray,
               normalize: bool = False) -> float:
    """``Tr(S^T (W - <P>) S)``, optionally divided by the total weight ``sum(W)``."""
    labels = part.assignment if isinstance(part, Partition) else np.asarray(part)
    if labels.size != g.n:
        raise PartitionError(f"partition covers {labels.size} nodes, graph has {g.n}")
    Q = modularity_from_comparison(g.weights - expectation, labels)
    if normalize:
        Q /= g.weights.sum()
    return Q


def kmeans(X: np.ndarray, c: int, rng: np.random.Generator, max_iter: int = 300) -> np.ndarray:
    """Lloyd's algorithm from k-means++ seeding; clusters are never left empty."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    centers = np.empty((c, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for j in range(1, c):
        total = d2.sum()
        idx = rng.choice(n, p=d2 / total) if total > 0 else rng.integers(n)
        centers[j] = X[idx]
        d2 = np.minimum(d2, np.sum((X - centers[j]) ** 2, axis=1))

    labels = np.full(n, -1)
    for _ in range(max_iter):
        dist = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new = np.argmin(dist, axis=1)
        counts = np.bincount(new, minlength=c)
        for j in np.flatnonzero(counts == 0):
            # refill an empty cluster with the point worst served by its centre
            own = dist[np.arange(n), new]
            movable = counts[new] > 1
            far = np.flatnonzero(movable)[np.argmax(own[movable])]
            counts[new[far]] -= 1
            new[far] = j
            counts[j] = 1
            dist[far] = 0
        if np.array_equal(new, labels):
            break
        labels = new
        for j in range(c):
            centers[j] = X[labels == j].mean(axis=0)
    return labels


def _check_points(X: np.ndarray, c: int) -> None:
    if c < 2:
        raise PartitionError("need at least two clusters")
    if np.unique(np.round(X, 12), axis=0).shape[0] < c:
        raise PartitionError(f"fewer than {c} distinct points to cluster")


def kmeans_runs(X: np.ndarray, c: int, p: int, seed: int = 0, stream: int = _KMEANS_STREAM,
                offset: int = 0) -> list[np.ndarray]:
    """``p`` independent k-means labellings; restart ``r`` uses substream ``offset + r``."""
    X = np.asarray(X, dtype=float)
    _check_points(X, c)
    return [kmeans(X, c, sample_rng(seed, offset + r, stream)) for r in range(p)]


def kmeans_partition(projection: np.ndarray, c: int, p: int, comparison: np.ndarray,
                     seed: int = 0) -> Partition:
    """Best-modularity partition over ``p`` k-means restarts (first restart wins ties)."""
    best, best_q = None, -np.inf
    for labels in kmeans_runs(projection, c, p, seed):
        q = modularity_from_comparison(comparison, labels)
        if q > best_q:
            best, best_q = labels, q
    return Partition(best, best_q)


def coclustering(partitions: list[np.ndarray]) -> np.ndarray:
    """Fraction of partitions placing each pair of nodes together."""
    n = len(partitions[0])
    D = np.zeros((n, n))
    for labels in partitions:
        S = indicator(labels)
        D += S @ S.T
    return D / len(partitions)


def consensus_null(cluster_counts) -> float:
    """Expected co-clustering of a pair when each partition into ``c`` groups is random.

    ``cluster_counts`` lists the target cluster number of every partition;
    the expectation is the mean of ``1/c``.
    """
    counts = np.asarray(cluster_counts, dtype=float)
    return float(np.mean(1.0 / counts))


@dataclass
class ConsensusState:
    consensus_matrix: np.ndarray
    null_value: float
    k_max: int
    converged: bool
    iterations: int

    @property
    def null_matrix(self) -> np.ndarray:
        n = self.consensus_matrix.shape[0]
        return np.full((n, n), self.null_value)


def _is_binary(D: np.ndarray, tol: float) -> bool:
    return bool(np.all((D <= tol) | (D >= 1 - tol)))


def _positive_count(vals: np.ndarray) -> int:
    scale = max(np.abs(vals).max(), 1.0) if vals.size else 1.0
    return int(np.sum(vals > 1e-10 * scale))


def _components(adj: np.ndarray) -> np.ndarray:
    _, labels = csgraph.connected_components(csr_matrix(adj), directed=False)
    return labels


def settled_partition(D: np.ndarray, null_value: float, tol: float = 1e-3) -> np.ndarray | None:
    """Partition encoded by the consensus matrix, or None if it encodes none.

    Pairs co-clustered more often than chance (``D > null``) must form
    disjoint cliques. A binary ``D`` (within ``tol``) always qualifies.
    """
    together = D >= 1 - tol if _is_binary(D, tol) else D > null_value
    labels = _components(together)
    if np.array_equal(labels[:, None] == labels[None, :], together):
        return labels
    return None


def _same_partition(a, b) -> bool:
    return b is not None and np.array_equal(relabel(a), relabel(b))


def consensus_cluster(comparison: np.ndarray, projection: np.ndarray, c: int, p: int = 100,
                      seed: int = 0, tol: float = 1e-3, max_iter: int = 50
                      ) -> tuple[Partition, ConsensusState]:
    """Iterated consensus clustering with an explicit null model for co-clustering.

    Starts from ``p`` k-means partitions of ``projection`` into ``c`` groups.
    Each round builds the co-clustering matrix ``D`` and subtracts its null
    expectation; the ``K`` positive eigenvalues of the difference give a
    ``K``-dimensional projection (eigenvectors scaled by ``sqrt(lambda)``)
    that is re-clustered ``p`` times for every ``k`` in ``2..K``.

    Converged once ``D`` is binary within ``tol``, or once the partition it
    encodes (see ``settled_partition``) is the same after two consecutive
    rounds. Without convergence the best-modularity partition seen is
    returned, flagged.
    """
    n = comparison.shape[0]
    partitions = kmeans_runs(projection, c, p, seed, _CONSENSUS_STREAM)
    targets = [c] * len(partitions)
    best, best_q = None, -np.inf

    def track(parts):
        nonlocal best, best_q
        for labels in parts:
            q = modularity_from_comparison(comparison, labels)
            if q > best_q:
                best, best_q = labels, q

    def done(labels, K, it):
        q = modularity_from_comparison(comparison, labels)
        return Partition(labels, q), ConsensusState(D, null, K, True, it + 1)

    track(partitions)
    offset = p
    K = c
    D = coclustering(partitions)
    null = consensus_null(targets)
    previous = None
    for it in range(max_iter + 1):
        settled = settled_partition(D, null, tol)
        if settled is not None and (_is_binary(D, tol) or _same_partition(settled, previous)):
            return done(settled, K, it)
        previous = settled
        if it == max_iter:
            break
        vals, vecs = eig_symmetric(D - null)
        K = min(_positive_count(vals), n - 1)
        if K < 2:
            if settled is not None:
                return done(settled, K, it)
            break
        X = vecs[:, :K] * np.sqrt(vals[:K])
        partitions, targets = [], []
        for k in range(2, K + 1):
            try:
                runs = kmeans_runs(X, k, p, seed, _CONSENSUS_STREAM, offset)
            except PartitionError:
                break
            offset += p
            partitions += runs
            targets += [k] * p
        if not partitions:
            break
        track(partitions)
        D = coclustering(partitions)
        null = consensus_null(targets)
    log.warning("consensus clustering did not converge; returning best-Q partition")
    part = Partition(best, best_q, converged=False)
    return part, ConsensusState(D, null, K, False, max_iter)


def louvain(comparison: np.ndarray, seed: int = 0, max_levels: int = 100) -> Partition:
    """Louvain optimisation of ``Tr(S^T C S)`` for a general comparison matrix.

    Nodes are swept in a seeded random order and moved to the community that
    most increases the score (staying put on ties; otherwise lowest label),
    then communities are merged into super-nodes and the sweep repeats.
    """
    C = np.asarray(comparison, dtype=float)
    n = C.shape[0]
    rng = sample_rng(seed, 0, _LOUVAIN_STREAM)
    membership = np.arange(n)
    M = C.copy()
    eps = 1e-12 * max(np.abs(C).max(), 1.0)
    for _ in range(max_levels):
        size = M.shape[0]
        labels = np.arange(size)
        counts = np.ones(size, dtype=int)
        moved_level = False
        while True:
            moved = False
            for i in rng.permutation(size):
                a = labels[i]
                row = np.bincount(labels, weights=M[i], minlength=size)
                row[a] -= M[i, i]
                current = row[a]
                row[counts == 0] = -np.inf
                row[a] = current
                b = int(np.argmax(row))
                target, gain = b, row[b]
                if counts[a] > 1 and 0 > gain + eps and 0 > current + eps:
                    target, gain = int(np.flatnonzero(counts == 0)[0]), 0.0
                if gain > current + eps and target != a:
                    labels[i] = target
                    counts[a] -= 1
                    counts[target] += 1
                    moved = moved_level = True
            if not moved:
                break
        if not moved_level:
            break
        labels = relabel(labels)
        membership = labels[membership]
        S = indicator(labels)
        M = S.T @ M @ S
    return Partition(membership, modularity_from_comparison(C, membership))


def multiway_vectors(eigenvalues, eigenvectors, k: int) -> np.ndarray:
    """Node vectors ``sqrt(lambda_l) U_il`` from the ``k - 1`` leading eigenpairs."""
    vals = np.asarray(eigenvalues, dtype=float)[: k - 1]
    if k < 2:
        raise PartitionError("k must be at least 2")
    if vals.size < k - 1 or np.any(vals <= 0):
        raise PartitionError(f"k={k} needs {k - 1} positive eigenvalues")
    return np.asarray(eigenvectors)[:, : k - 1] * np.sqrt(vals)


def multiway_partition(eigenvalues, eigenvectors, k: int, seed: int = 0,
                       initial: np.ndarray | None = None, max_iter: int = 1000,
                       comparison: np.ndarray | None = None) -> Partition:
    """Vector partitioning into at most ``k`` groups.

    Group vectors start as ``k`` distinct node vectors picked at random (or as
    the group sums of ``initial``). Each node joins the group with the largest
    inner product, its own group's vector excluding its own contribution.
    Groups that empty out are dropped.
    """
    r = multiway_vectors(eigenvalues, eigenvectors, k)
    n = r.shape[0]
    rng = sample_rng(seed, k, _MULTIWAY_STREAM)
    if initial is None:
        R = r[rng.choice(n, size=k, replace=False)].copy()
        assign = np.full(n, -1)
    else:
        assign = relabel(initial)
        R = np.zeros((k, r.shape[1]))
        np.add.at(R, assign, r)
    active = np.ones(R.shape[0], dtype=bool)
    if initial is not None:
        active[assign.max() + 1:] = False
    converged = False
    for _ in range(max_iter):
        scores = r @ R.T
        has = assign >= 0
        idx = np.flatnonzero(has)
        scores[idx, assign[idx]] -= np.sum(r[idx] ** 2, axis=1)
        scores[:, ~active] = -np.inf
        new = np.argmax(scores, axis=1)
        top = scores[np.arange(n), new]
        stay = has & (scores[np.arange(n), np.where(has, assign, 0)] >= top)
        new = np.where(stay, assign, new)
        R_new = np.zeros_like(R)
        np.add.at(R_new, new, r)
        active = np.bincount(new, minlength=R.shape[0]) > 0
        if np.array_equal(new, assign) and np.allclose(R_new, R, rtol=0, atol=1e-12):
            converged = True
            break
        assign, R = new, R_new
    if not converged:
        log.warning("multiway partition did not converge in %d iterations", max_iter)
    q = modularity_from_comparison(comparison, assign) if comparison is not None else np.nan
    return Partition(assign, q, converged)


def knee(ks, qs) -> int:
    """``k`` minimising the summed squared error of two line fits meeting at ``k``.

    Both fits include the candidate point itself; ties go to the smaller ``k``.
    """
    ks = np.asarray(ks, dtype=float)
    qs = np.asarray(qs, dtype=float)
    if ks.size < 2:
        raise PartitionError("need at least two points to locate a knee")
    candidates = range(1, ks.size - 1) if ks.size >= 3 else range(1, 2)

    def sse(x, y):
        if x.size < 3:
            return 0.0
        coef = np.polyfit(x, y, 1)
        return float(np.sum((np.polyval(coef, x) - y) ** 2))

    errors = [sse(ks[: i + 1], qs[: i + 1]) + sse(ks[i:], qs[i:]) for i in candidates]
    best = int(np.argmin(np.round(errors, 12)))
    return int(ks[list(candidates)[best]])


@dataclass
class MultiwayScan:
    ks: np.ndarray
    qualities: np.ndarray
    partitions: list[Partition]
    knee: int


def multiway_unsupervised(eigenvalues, eigenvectors, comparison: np.ndarray, k_max: int = 20,
                          seed: int = 0) -> tuple[Partition, MultiwayScan]:
    """Scan ``k = 2..k_max`` and keep the partition at the knee of the ``k`` vs ``Q`` curve."""
    if k_max < 3:
        raise PartitionError("k_max must be at least 3 to locate a knee")
    vals = np.asarray(eigenvalues, dtype=float)
    available = int(np.sum(vals > 0)) + 1
    k_hi = min(k_max, available)
    if k_hi < 2:
        raise PartitionError("no positive eigenvalues to partition with")
    ks = np.arange(2, k_hi + 1)
    parts = [multiway_partition(vals, eigenvectors, int(k), seed, comparison=comparison)
             for k in ks]
    qs = np.array([p.quality for p in parts])
    k_star = knee(ks, qs) if ks.size >= 2 else int(ks[0])
    return parts[int(k_star - 2)], MultiwayScan(ks, qs, parts, k_star)

"""Weighted configuration null models and their sampled ensembles.

Two generative models are provided. The full weighted configuration model
places weight on every pair of nodes in proportion to ``s_i s_j``. The sparse
variant first draws an adjacency matrix at the data's density (Chung-Lu style,
``k_i k_j / 2m``) and only places weight on the sampled links.

Sampling works on integer weights. Real-valued graphs are multiplied by
``kappa`` and rounded first; samples are divided by ``kappa`` afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from ._parallel import ordered_map
from .graph import REAL, WeightedGraph

FULL_WCM = "full_wcm"
SPARSE_WCM = "sparse_wcm"
POISSON = "poisson"
STUB_MATCHING = "stub_matching"

# keeps the sample substreams disjoint from other consumers of the same seed
_SAMPLE_STREAM = 0x5A3D

_MAX_SCALED_WEIGHT = 2.0 ** 52


class NullModelError(ValueError):
    pass


@dataclass(frozen=True)
class NullModelSpec:
    kind: str = SPARSE_WCM
    num_samples: int = 100
    kappa: float = 1.0
    sampler: str = POISSON
    seed: int = 0
    # "conserve": residual budget is half the total strength minus sampled links;
    # "literal": subtract twice the sampled links instead
    sparse_budget: str = "conserve"
    stub_retries: int = 100

    def __post_init__(self):
        if self.kind not in (FULL_WCM, SPARSE_WCM):
            raise NullModelError(f"unknown null model kind {self.kind!r}")
        if self.sampler not in (POISSON, STUB_MATCHING):
            raise NullModelError(f"unknown sampler {self.sampler!r}")
        if self.sampler == STUB_MATCHING and self.kind != FULL_WCM:
            raise NullModelError("stub matching is only implemented for the full WCM")
        if int(self.num_samples) < 1:
            raise NullModelError("num_samples must be at least 1")
        if not self.kappa >= 1:
            raise NullModelError("kappa must be >= 1")
        if self.sparse_budget not in ("conserve", "literal"):
            raise NullModelError(f"unknown sparse budget rule {self.sparse_budget!r}")


def sample_rng(seed: int, index: int, stream: int = _SAMPLE_STREAM) -> np.random.Generator:
    """Independent generator keyed only by ``(seed, stream, index)``."""
    return np.random.default_rng([int(seed) & (2**64 - 1), stream, int(index)])


def scaled_weights(g: WeightedGraph, kappa: float = 1.0) -> np.ndarray:
    """Integer-valued weight matrix used by the samplers."""
    W = g.weights
    if kappa != 1 or g.weight_granularity == REAL:
        W = np.round(W * kappa)
    if W.size and W.max() > _MAX_SCALED_WEIGHT:
        raise NullModelError("scaled weights overflow the integer range")
    return W


def wcm_expectation(g: WeightedGraph, kappa: float = 1.0) -> np.ndarray:
    """Configuration-model expectation ``s_i s_j / sum(s)``, diagonal included.

    Normalising by the total strength keeps ``sum(<P>) == sum(W)``.
    """
    if g.n < 2:
        raise NullModelError("expectation needs at least two nodes")
    s = scaled_weights(g, kappa).sum(axis=1)
    total = s.sum()
    if total <= 0:
        raise NullModelError("graph has no weight")
    return np.outer(s, s) / total / kappa


def _to_matrix(n: int, iu: tuple[np.ndarray, np.ndarray], values: np.ndarray) -> np.ndarray:
    P = np.zeros((n, n))
    P[iu] = values
    return P + P.T


class _Prepared:
    """Per-graph quantities shared by every sample."""

    def __init__(self, g: WeightedGraph, spec: NullModelSpec):
        W = scaled_weights(g, spec.kappa)
        self.n = g.n
        self.kappa = spec.kappa
        self.iu = np.triu_indices(g.n, 1)
        self.strengths = W.sum(axis=1)
        self.degrees = (W > 0).sum(axis=1).astype(float)
        self.links = int(np.count_nonzero(W[self.iu]))
        s = self.strengths
        self.strength_products = s[self.iu[0]] * s[self.iu[1]]
        if self.links:
            k = self.degrees
            self.link_probs = np.minimum(1.0, k[self.iu[0]] * k[self.iu[1]] / (2 * self.links))
        else:
            self.link_probs = np.zeros_like(self.strength_products)
        self.half_strength = s.sum() / 2


def _full_poisson(prep: _Prepared, rng: np.random.Generator) -> np.ndarray:
    denom = prep.strength_products.sum()
    if denom <= 0:
        return np.zeros((prep.n, prep.n))
    rates = prep.half_strength * prep.strength_products / denom
    w = rng.poisson(rates).astype(float)
    return _to_matrix(prep.n, prep.iu, w) / prep.kappa


def _sparse_poisson(prep: _Prepared, rng: np.random.Generator, budget_rule: str) -> np.ndarray:
    linked = rng.random(prep.link_probs.shape) < prep.link_probs
    m_star = int(linked.sum())
    w = np.zeros(prep.link_probs.shape)
    if m_star == 0:
        return np.zeros((prep.n, prep.n))
    used = m_star if budget_rule == "conserve" else 2 * m_star
    budget = max(0.0, prep.half_strength - used)
    prods = prep.strength_products[linked]
    denom = prods.sum()
    extra = rng.poisson(budget * prods / denom) if denom > 0 else 0
    w[linked] = 1.0 + extra
    return _to_matrix(prep.n, prep.iu, w) / prep.kappa


def _stub_matching(prep: _Prepared, rng: np.random.Generator, retries: int) -> np.ndarray:
    stubs0 = prep.strengths.astype(np.int64)
    for _ in range(retries + 1):
        stubs = stubs0.copy()
        if stubs.sum() % 2:
            drop = rng.choice(prep.n, p=stubs / stubs.sum())
            stubs[drop] -= 1
        W = np.zeros((prep.n, prep.n))
        stuck = False
        while stubs.sum() > 0:
            a = rng.choice(prep.n, p=stubs / stubs.sum())
            stubs[a] -= 1
            others = stubs.copy()
            others[a] = 0
            if others.sum() == 0:
                stuck = True
                break
            b = rng.choice(prep.n, p=others / others.sum())
            stubs[b] -= 1
            W[a, b] += 1
            W[b, a] += 1
        if not stuck:
            return W / prep.kappa
    raise NullModelError("stub matching failed to avoid self-pairings within the retry budget")


def _draw(prep: _Prepared, spec: NullModelSpec, index: int) -> np.ndarray:
    rng = sample_rng(spec.seed, index)
    if spec.sampler == STUB_MATCHING:
        return _stub_matching(prep, rng, spec.stub_retries)
    if spec.kind == FULL_WCM:
        return _full_poisson(prep, rng)
    return _sparse_poisson(prep, rng, spec.sparse_budget)


def sample_full_wcm(g: WeightedGraph, spec: NullModelSpec, sample_index: int) -> np.ndarray:
    """Draw sample ``sample_index`` of the full WCM with Poisson link weights."""
    return _full_poisson(_Prepared(g, spec), sample_rng(spec.seed, sample_index))


def sample_sparse_wcm(g: WeightedGraph, spec: NullModelSpec, sample_index: int) -> np.ndarray:
    """Draw sample ``sample_index`` of the sparse WCM.

    Each sampled link gets weight 1, and the remaining weight budget is spread
    over the sampled links with Poisson rates proportional to ``s_i s_j``.
    """
    return _sparse_poisson(_Prepared(g, spec), sample_rng(spec.seed, sample_index),
                           spec.sparse_budget)


def sample_stub_matching(g: WeightedGraph, spec: NullModelSpec, sample_index: int) -> np.ndarray:
    """Exact multinomial placement: node ``i`` gets ``s_i`` stubs, paired uniformly.

    Self-pairings are redrawn; if only one node's stubs are left the whole
    sample is restarted, at most ``spec.stub_retries`` times. Meant for small
    graphs only.
    """
    return _stub_matching(_Prepared(g, spec), sample_rng(spec.seed, sample_index),
                          spec.stub_retries)


@dataclass
class NullEnsemble:
    """A reproducible set of null-model samples for one graph.

    Samples are regenerated from ``(seed, index)`` on demand unless
    ``retain`` was requested, so memory stays at a single ``n x n`` matrix per
    worker.
    """

    graph: WeightedGraph
    spec: NullModelSpec
    expectation: np.ndarray
    jobs: int = 1
    _prep: _Prepared = field(repr=False, default=None)
    _samples: np.ndarray | None = field(repr=False, default=None)

    @property
    def num_samples(self) -> int:
        return self.spec.num_samples

    def sample(self, index: int) -> np.ndarray:
        if self._samples is not None:
            return self._samples[index]
        return _draw(self._prep, self.spec, index)

    def __iter__(self) -> Iterator[np.ndarray]:
        for i in range(self.num_samples):
            yield self.sample(i)

    def map(self, fn, jobs: int | None = None) -> list:
        """Apply ``fn(sample)`` to every sample, returning results in sample order."""
        return ordered_map(lambda i: fn(self.sample(i)), range(self.num_samples),
                           self.jobs if jobs is None else jobs)

    @property
    def samples(self) -> np.ndarray:
        if self._samples is not None:
            return self._samples
        return np.stack(list(self))


def build_ensemble(g: WeightedGraph, spec: NullModelSpec, jobs: int = 1,
                   retain: bool = False) -> NullEnsemble:
    """Set up ``spec.num_samples`` samples and the model expectation ``<P>``.

    The full WCM uses its analytic expectation; the sparse WCM uses the mean of
    its samples, summed in sample order so the result is independent of
    ``jobs``.
    """
    prep = _Prepared(g, spec)
    ens = NullEnsemble(g, spec, np.zeros((g.n, g.n)), jobs, prep)
    if retain:
        ens._samples = np.stack(ordered_map(lambda i: _draw(prep, spec, i),
                                            range(spec.num_samples), jobs))
    if spec.kind == FULL_WCM:
        ens.expectation = wcm_expectation(g, spec.kappa)
    elif ens._samples is not None:
        ens.expectation = ens._samples.mean(axis=0)
    else:
        total = np.zeros((g.n, g.n))
        for chunk_start in range(0, spec.num_samples, max(1, jobs) * 4):
            idx = range(chunk_start, min(spec.num_samples, chunk_start + max(1, jobs) * 4))
            for P in ordered_map(lambda i: _draw(prep, spec, i), idx, jobs):
                total += P
        ens.expectation = total / spec.num_samples
    return ens


def dump_samples(ensemble: NullEnsemble, directory) -> list:
    """Write each sample as ``sample_<index>.tsv`` in ``directory``."""
    from pathlib import Path

    from .graph import write_edge_list

    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(ensemble.num_samples):
        g = WeightedGraph(ensemble.graph.node_labels, ensemble.sample(i))
        path = out / f"sample_{i}.tsv"
        with open(path, "w", encoding="utf-8") as fh:
            write_edge_list(g, fh)
        paths.append(path)
    return paths

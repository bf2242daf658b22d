"""End-to-end analysis: null ensemble, bounds, rejection, clustering."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .graph import WeightedGraph, count_difference, giant_component, integer_weights, weight_counts
from .metrics import ground_truth_variants, rejection_score, vi_on_common_nodes
from .nullmodels import (FULL_WCM, SPARSE_WCM, NullEnsemble, NullModelSpec, build_ensemble,
                         sample_sparse_wcm)
from .partition import (ConsensusState, MultiwayScan, Partition, consensus_cluster,
                        kmeans_partition, louvain, multiway_unsupervised)
from .rejection import KPartiteResult, SignalDecomposition, decompose, kpartite_extract
from .spectral import SpectralEstimate, comparison_matrix, eig_symmetric, spectral_estimate
from .synthetic import SweepConfig, SyntheticSpec, generate_wsbm

log = logging.getLogger(__name__)

NULL_ALIASES = {"wcm": FULL_WCM, "full": FULL_WCM, FULL_WCM: FULL_WCM,
                "sparse": SPARSE_WCM, SPARSE_WCM: SPARSE_WCM}
CLUSTER_METHODS = ("kmeans", "consensus", "louvain", "multiway")


@dataclass
class RunConfig:
    null: str = SPARSE_WCM
    num_samples: int = 100
    kappa: float = 1.0
    sampler: str = "poisson"
    seed: int = 0
    bound: str = "mean"
    alpha: float = 0.975
    cluster: str = "consensus"
    restarts: int = 100
    k_max: int = 20
    jobs: int = 1

    def __post_init__(self):
        if self.null not in NULL_ALIASES:
            raise ValueError(f"unknown null model {self.null!r}")
        self.null = NULL_ALIASES[self.null]
        if self.cluster not in CLUSTER_METHODS:
            raise ValueError(f"unknown clustering method {self.cluster!r}")
        self.null_spec()  # validates the null-model fields

    def null_spec(self) -> NullModelSpec:
        return NullModelSpec(kind=self.null, num_samples=self.num_samples, kappa=self.kappa,
                             sampler=self.sampler, seed=self.seed)


@dataclass
class ClusterResult:
    method: str
    partition: Partition
    consensus: ConsensusState | None = None
    scan: MultiwayScan | None = None


@dataclass
class AnalysisResult:
    graph: WeightedGraph  # giant component actually analysed
    input_nodes: int
    ensemble: NullEnsemble
    estimate: SpectralEstimate
    signal: SignalDecomposition | None = None
    clusters: ClusterResult | None = None
    kpartite: KPartiteResult | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def structure(self) -> str:
        if self.estimate.d_pos and self.estimate.d_neg:
            return "both"
        if self.estimate.d_pos:
            return "communities"
        if self.estimate.d_neg:
            return "kpartite"
        return "none"


def cluster_signal(g: WeightedGraph, expectation: np.ndarray, nodes: np.ndarray, d: int,
                   method: str, restarts: int = 100, seed: int = 0,
                   k_max: int = 20) -> ClusterResult:
    """Cluster the sub-network on ``nodes`` in its own ``d``-dimensional projection."""
    C = comparison_matrix(g, expectation)[np.ix_(nodes, nodes)]
    vals, vecs = eig_symmetric(C)
    # clustering uses the unscaled eigenvectors; rejection uses the lambda-scaled ones
    projection = vecs[:, :d]
    if method == "kmeans":
        return ClusterResult(method, kmeans_partition(projection, d + 1, restarts, C, seed))
    if method == "consensus":
        part, state = consensus_cluster(C, projection, d + 1, restarts, seed)
        return ClusterResult(method, part, consensus=state)
    if method == "louvain":
        return ClusterResult(method, louvain(C, seed))
    if method == "multiway":
        part, scan = multiway_unsupervised(vals, vecs, C, k_max, seed)
        return ClusterResult(method, part, scan=scan)
    raise ValueError(f"unknown clustering method {method!r}")


def analyze(g: WeightedGraph, config: RunConfig | None = None) -> AnalysisResult:
    config = config or RunConfig()
    g0 = giant_component(g)
    ens = build_ensemble(g0, config.null_spec(), jobs=config.jobs)
    est = spectral_estimate(g0, ens, config.bound, config.alpha, jobs=config.jobs)
    result = AnalysisResult(g0, g.n, ens, est)
    if g0.n < g.n:
        result.notes.append(f"analysed giant component: {g0.n} of {g.n} nodes")
    if est.d_pos > 0:
        result.signal = decompose(g0, est, ens, jobs=config.jobs)
        nodes = result.signal.signal_indices(g0)
        if nodes.size > est.d_pos + 1:
            try:
                result.clusters = cluster_signal(g0, ens.expectation, nodes, est.d_pos,
                                                 config.cluster, config.restarts,
                                                 config.seed, config.k_max)
            except ValueError as exc:
                result.notes.append(f"clustering skipped: {exc}")
        else:
            result.notes.append("signal network too small to cluster")
    if est.d_neg > 0:
        result.kpartite = kpartite_extract(est, ens, jobs=config.jobs)
    return result


def analyze_synthetic(spec: SyntheticSpec, config: SweepConfig) -> dict:
    """One sweep row: detection, dimensions, clustering accuracy and rejection rates."""
    g, truth = generate_wsbm(spec)
    run = RunConfig(null=config.null, num_samples=config.num_samples, kappa=config.kappa,
                    seed=spec.seed, bound=config.bound, alpha=config.alpha,
                    cluster=config.cluster, restarts=config.restarts, jobs=config.jobs)
    res = analyze(g, run)
    est = res.estimate
    row = {"detected": est.d_pos > 0, "d_pos": est.d_pos, "groups_found": 1,
           "vi_own_group": 0.0, "vi_single_group": 0.0, "tpr": None, "tnr": None}
    if not est.d_pos:
        return row
    # indices of the analysed giant component inside the generated network
    original = np.array([g.index_of(x) for x in res.graph.node_labels], dtype=int)
    kept = set(original[res.signal.retained].tolist())
    rejected = [i for i in range(g.n) if i not in kept]
    score = rejection_score(rejected, truth)
    row["tpr"], row["tnr"] = score.tpr, score.tnr
    if res.clusters is not None:
        part = res.clusters.partition
        nodes = original[res.signal.signal_indices(res.graph)]
        own, shared = ground_truth_variants(truth)
        every = np.arange(truth.total_nodes)
        row["groups_found"] = part.num_groups
        row["vi_own_group"] = vi_on_common_nodes(nodes, part, every, own)
        row["vi_single_group"] = vi_on_common_nodes(nodes, part, every, shared)
    return row


DIAGNOSTIC_COLUMNS = ("model", "sample", "weight", "data_count", "model_count",
                      "count_difference", "data_cdf", "model_cdf")


def weight_diagnostic_rows(g: WeightedGraph, model_weights: np.ndarray, kappa: float = 1.0,
                           model: str = "", sample: int = 0) -> list[dict]:
    """Per-weight counts and CDFs of the data versus one sampled (or any) weight matrix."""
    data = weight_counts(integer_weights(g, kappa))
    iu = np.triu_indices(g.n, 1)
    mw = np.round(np.asarray(model_weights)[iu] * kappa)
    sampled = weight_counts(mw[mw > 0])
    diff = count_difference(data, sampled)
    dtot, mtot = max(sum(data.values()), 1), max(sum(sampled.values()), 1)
    rows, dc, mc = [], 0, 0
    for w in sorted(diff):
        dc += data.get(w, 0)
        mc += sampled.get(w, 0)
        rows.append({"model": model, "sample": sample, "weight": w,
                     "data_count": data.get(w, 0), "model_count": sampled.get(w, 0),
                     "count_difference": diff[w], "data_cdf": dc / dtot, "model_cdf": mc / mtot})
    return rows


def null_weight_diagnostic(g: WeightedGraph, spec: NullModelSpec) -> list[dict]:
    """Weight-distribution comparison against every sample of ``spec``."""
    ens = build_ensemble(g, spec)
    rows = []
    for i in range(spec.num_samples):
        rows += weight_diagnostic_rows(g, ens.sample(i), spec.kappa, spec.kind, i)
    return rows


def max_count_error(rows: list[dict]) -> dict[int, int]:
    """Largest absolute count difference per sample."""
    out: dict[int, int] = {}
    for r in rows:
        out[r["sample"]] = max(out.get(r["sample"], 0), abs(r["count_difference"]))
    return out


def null_consistent_surrogate(g: WeightedGraph, seed: int = 0) -> WeightedGraph:
    """One sparse-WCM draw of ``g`` to be used as data (a network with no structure)."""
    spec = NullModelSpec(kind=SPARSE_WCM, num_samples=1, seed=seed)
    return WeightedGraph(g.node_labels, sample_sparse_wcm(g, spec, 0))

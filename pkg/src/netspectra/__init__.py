"""Spectral estimation of low-dimensional structure in weighted networks.

Compare a network against sampled null models, count the eigenvalues of the
comparison matrix that escape the null spectrum, reject nodes that do not
project into that space, and cluster what is left.
"""

from .graph import (WeightedGraph, giant_component, load_edge_list, load_les_miserables,
                    strip_leaves, weight_distribution)
from .metrics import rejection_score, variation_of_information, vi_normalized
from .nullmodels import (FULL_WCM, SPARSE_WCM, NullModelSpec, build_ensemble,
                         sample_full_wcm, sample_sparse_wcm, sample_stub_matching)
from .partition import (Partition, consensus_cluster, kmeans_partition, louvain, modularity,
                        multiway_partition, multiway_unsupervised)
from .pipeline import AnalysisResult, RunConfig, analyze
from .rejection import decompose, kpartite_extract
from .spectral import comparison_matrix, spectral_estimate
from .synthetic import SyntheticSpec, generate_wsbm, sweep_detection

__version__ = "0.1.0"

__all__ = [
    "FULL_WCM", "SPARSE_WCM", "AnalysisResult", "NullModelSpec", "Partition", "RunConfig",
    "SyntheticSpec", "WeightedGraph", "analyze", "build_ensemble", "comparison_matrix",
    "consensus_cluster", "decompose", "generate_wsbm", "giant_component", "kmeans_partition",
    "kpartite_extract", "load_edge_list", "load_les_miserables", "louvain", "modularity",
    "multiway_partition", "multiway_unsupervised", "rejection_score", "sample_full_wcm",
    "sample_sparse_wcm", "sample_stub_matching", "spectral_estimate", "strip_leaves",
    "sweep_detection", "variation_of_information", "vi_normalized", "weight_distribution",
]

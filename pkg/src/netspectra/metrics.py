"""Partition comparison and rejection accuracy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .partition import Partition, relabel
from .synthetic import GroundTruth


class MetricError(ValueError):
    pass


def _labels(x) -> np.ndarray:
    return x.assignment if isinstance(x, Partition) else np.asarray(x)


def _entropies(a: np.ndarray, b: np.ndarray) -> tuple[float, float, float]:
    n = a.size
    a, b = relabel(a), relabel(b)
    joint = np.zeros((a.max() + 1, b.max() + 1))
    np.add.at(joint, (a, b), 1.0)
    joint /= n
    pa, pb = joint.sum(axis=1), joint.sum(axis=0)
    nz = joint > 0
    h_a = -np.sum(pa * np.log(pa))
    h_b = -np.sum(pb * np.log(pb))
    mi = np.sum(joint[nz] * np.log(joint[nz] / np.outer(pa, pb)[nz]))
    return float(h_a), float(h_b), float(mi)


def variation_of_information(a, b) -> float:
    """``H(a) + H(b) - 2 I(a, b)`` in nats."""
    a, b = _labels(a), _labels(b)
    if a.size != b.size:
        raise MetricError(f"partitions cover {a.size} and {b.size} nodes")
    if a.size == 0:
        return 0.0
    h_a, h_b, mi = _entropies(a, b)
    return max(0.0, h_a + h_b - 2 * mi)


def vi_normalized(a, b) -> float:
    """Variation of information divided by ``log(n)``, so it lies in [0, 1]."""
    a, b = _labels(a), _labels(b)
    if a.size != b.size:
        raise MetricError(f"partitions cover {a.size} and {b.size} nodes")
    if a.size < 2:
        return 0.0
    return variation_of_information(a, b) / np.log(a.size)


def vi_on_common_nodes(a_nodes, a, b_nodes, b) -> float:
    """Normalised VI restricted to the nodes both partitions label."""
    pos_a = {int(x): i for i, x in enumerate(a_nodes)}
    pos_b = {int(x): i for i, x in enumerate(b_nodes)}
    common = sorted(set(pos_a) & set(pos_b))
    la, lb = _labels(a), _labels(b)
    return vi_normalized(la[[pos_a[x] for x in common]], lb[[pos_b[x] for x in common]])


@dataclass(frozen=True)
class RejectionScore:
    tpr: float | None
    tnr: float | None


def rejection_score(rejected, truth: GroundTruth) -> RejectionScore:
    """True-positive rate on modular nodes and true-negative rate on noise nodes.

    A rate whose class is empty is reported as ``None``.
    """
    rejected = set(int(x) for x in rejected)
    modular = truth.modular_nodes
    noise = truth.noise_nodes
    tpr = (sum(int(i) not in rejected for i in modular) / modular.size) if modular.size else None
    tnr = (sum(int(i) in rejected for i in noise) / noise.size) if noise.size else None
    return RejectionScore(tpr, tnr)


def ground_truth_variants(truth: GroundTruth) -> tuple[Partition, Partition]:
    """Planted partition with noise nodes as singletons (A) or as one extra group (B)."""
    modules = np.asarray(truth.module_of)
    g = modules.max() + 1 if modules.size else 0
    k = len(truth.noise_nodes)
    own = np.concatenate([modules, g + np.arange(k)])
    shared = np.concatenate([modules, np.full(k, g)])
    return Partition(own), Partition(shared)

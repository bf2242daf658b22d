import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netspectra.metrics import (MetricError, ground_truth_variants, rejection_score,
                                variation_of_information, vi_normalized, vi_on_common_nodes)
from netspectra.partition import Partition
from netspectra.synthetic import GroundTruth


def _vi_oracle(a, b):
    """VI from cluster-overlap counts, written without numpy."""
    n = len(a)
    ca, cb, joint = Counter(a), Counter(b), Counter(zip(a, b))
    vi = 0.0
    for (x, y), r in joint.items():
        vi -= r / n * (math.log(r / ca[x]) + math.log(r / cb[y]))
    return vi


labels10 = st.lists(st.integers(0, 4), min_size=10, max_size=10)


def test_identical_partitions():
    assert vi_normalized([0, 0, 1, 2], [5, 5, 7, 9]) == 0


def test_four_node_example():
    assert vi_normalized([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(1.0)
    assert variation_of_information([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(2 * math.log(2))


def test_mismatch_and_degenerate():
    with pytest.raises(MetricError):
        vi_normalized([0, 1], [0, 1, 2])
    with pytest.raises(MetricError):
        variation_of_information([0], [0, 1])
    assert vi_normalized([0], [0]) == 0
    assert variation_of_information([], []) == 0


@settings(max_examples=200, deadline=None)
@given(labels10, labels10, labels10)
def test_vi_metric_axioms(a, b, c):
    ab = variation_of_information(a, b)
    assert ab == pytest.approx(_vi_oracle(a, b), abs=1e-12)
    assert ab == pytest.approx(variation_of_information(b, a), abs=1e-12)
    assert ab >= 0
    same = Partition(np.array(a)).assignment.tolist() == Partition(np.array(b)).assignment.tolist()
    assert (ab < 1e-12) == same
    assert ab <= variation_of_information(a, c) + variation_of_information(c, b) + 1e-12
    assert 0 <= vi_normalized(a, b) <= 1 + 1e-12


@settings(max_examples=50, deadline=None)
@given(labels10, labels10, st.permutations(range(10)))
def test_vi_node_relabel_invariant(a, b, perm):
    a, b = np.array(a), np.array(b)
    assert vi_normalized(a[list(perm)], b[list(perm)]) == pytest.approx(vi_normalized(a, b))


def test_vi_accepts_partition_objects():
    assert vi_normalized(Partition(np.array([0, 1, 1])), np.array([1, 0, 0])) == 0


def test_vi_on_common_nodes():
    # nodes 1 and 3 are missing from the first partition
    v = vi_on_common_nodes([0, 2, 4, 5], [0, 0, 1, 1], range(6), [7, 7, 7, 8, 8, 8])
    assert v == pytest.approx(vi_normalized([0, 0, 1, 1], [7, 7, 8, 8]))


def _truth(modules, noise):
    module_of = np.repeat(np.arange(modules), 2)
    return GroundTruth(module_of, np.arange(module_of.size, module_of.size + noise))


def test_rejection_score_examples():
    t = _truth(2, 2)
    perfect = rejection_score([4, 5], t)
    assert (perfect.tpr, perfect.tnr) == (1, 1)
    everything = rejection_score(range(6), t)
    assert (everything.tpr, everything.tnr) == (0, 1)
    partial = rejection_score([0, 4], t)
    assert (partial.tpr, partial.tnr) == (0.75, 0.5)
    no_noise = rejection_score([0], _truth(2, 0))
    assert no_noise.tnr is None and no_noise.tpr == 0.75


def test_ground_truth_variants_counts():
    own, shared = ground_truth_variants(_truth(4, 3))
    assert own.num_groups == 7 and shared.num_groups == 5
    a, b = ground_truth_variants(_truth(3, 0))
    np.testing.assert_array_equal(a.assignment, b.assignment)
    np.testing.assert_array_equal(a.assignment, np.repeat(np.arange(3), 2))


def test_merged_noise_closer_to_shared_variant():
    # 8 nodes: two modules of 3 and 2 noise nodes; enumerate every labelling
    # of the noise nodes while keeping the modules intact
    t = GroundTruth(np.repeat([0, 1], 3), np.array([6, 7]))
    own, shared = ground_truth_variants(t)
    checked = 0
    for x, y in itertools.product(range(3), repeat=2):
        if x != y:
            continue
        part = np.r_[np.repeat([0, 1], 3), [x, y]]
        assert vi_normalized(part, own) >= vi_normalized(part, shared)
        checked += 1
    assert checked == 3

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netspectra.graph import WeightedGraph
from netspectra.nullmodels import (FULL_WCM, SPARSE_WCM, STUB_MATCHING, NullModelError,
                                   NullModelSpec, build_ensemble, dump_samples, sample_full_wcm,
                                   sample_rng, sample_sparse_wcm, sample_stub_matching,
                                   wcm_expectation)

from conftest import random_graph

SIX = np.array([[0, 3, 1, 0, 2, 1], [3, 0, 2, 1, 0, 0], [1, 2, 0, 4, 1, 0],
                [0, 1, 4, 0, 2, 1], [2, 0, 1, 2, 0, 3], [1, 0, 0, 1, 3, 0]], dtype=float)


@pytest.fixture(scope="module")
def ten_node():
    return random_graph(10, 0.5, np.random.default_rng(11), max_weight=6)


def test_expectation_triangle(triangle):
    np.testing.assert_allclose(wcm_expectation(triangle), np.full((3, 3), 2 / 3))


def test_expectation_star():
    W = np.zeros((4, 4))
    W[0, 1:] = W[1:, 0] = 1
    P = wcm_expectation(WeightedGraph.from_matrix(W))
    assert P[0, 1] == pytest.approx(0.5)
    assert P[0, 0] == pytest.approx(1.5)


def test_expectation_preserves_total_and_strengths(ten_node):
    P = wcm_expectation(ten_node)
    assert P.sum() == pytest.approx(ten_node.weights.sum())
    np.testing.assert_allclose(P.sum(axis=1), ten_node.strengths)


def test_expectation_needs_weight():
    with pytest.raises(NullModelError):
        wcm_expectation(WeightedGraph.from_matrix(np.zeros((3, 3))))


@pytest.mark.parametrize("kwargs", [dict(kind="other"), dict(num_samples=0), dict(kappa=0.5),
                                    dict(sampler="x"), dict(kind=SPARSE_WCM, sampler=STUB_MATCHING)])
def test_spec_validation(kwargs):
    with pytest.raises(NullModelError):
        NullModelSpec(**kwargs)


def _check_sample(S):
    np.testing.assert_array_equal(S, S.T)
    assert np.all(np.diag(S) == 0)
    assert np.all(S >= 0)


def test_full_wcm_total_weight_moment(ten_node):
    spec = NullModelSpec(kind=FULL_WCM, seed=5)
    totals = np.array([np.triu(sample_full_wcm(ten_node, spec, i), 1).sum() for i in range(1000)])
    target = ten_node.strengths.sum() / 2
    # sum of independent Poissons is Poisson: variance equals the mean
    assert abs(totals.mean() - target) < 3 * np.sqrt(target / 1000)


def test_full_wcm_strength_moment(ten_node):
    spec = NullModelSpec(kind=FULL_WCM, seed=6)
    S = np.array([sample_full_wcm(ten_node, spec, i).sum(axis=1) for i in range(1000)])
    s = ten_node.strengths
    iu = np.triu_indices(ten_node.n, 1)
    prods = s[iu[0]] * s[iu[1]]
    # independent oracle: node i's expected strength sums its pair rates
    rates = np.zeros((ten_node.n, ten_node.n))
    rates[iu] = s.sum() / 2 * prods / prods.sum()
    expected = (rates + rates.T).sum(axis=1)
    se = np.sqrt(expected / 1000)
    assert np.all(np.abs(S.mean(axis=0) - expected) < 3 * se + 1e-12)


def test_full_wcm_pair_rates_scale_with_strength_products():
    g = WeightedGraph.from_matrix(SIX)
    spec = NullModelSpec(kind=FULL_WCM, seed=2)
    M = np.mean([sample_full_wcm(g, spec, i) for i in range(4000)], axis=0)
    s = g.strengths
    iu = np.triu_indices(6, 1)
    rate = s.sum() / 2 * np.outer(s, s) / np.sum(s[iu[0]] * s[iu[1]])
    assert np.all(np.abs(M - rate)[iu] < 3 * np.sqrt(rate[iu] / 4000) + 1e-12)


def test_zero_weight_graph_gives_empty_samples():
    g = WeightedGraph.from_matrix(np.zeros((3, 3)))
    spec = NullModelSpec(kind=FULL_WCM)
    assert not sample_full_wcm(g, spec, 0).any()
    assert not sample_sparse_wcm(g, NullModelSpec(), 0).any()


def _link_probs(g):
    k = g.degrees.astype(float)
    iu = np.triu_indices(g.n, 1)
    return np.minimum(1, k[iu[0]] * k[iu[1]] / (2 * g.num_links))


def _link_counts(g, spec, n):
    return np.array([np.count_nonzero(np.triu(sample_sparse_wcm(g, spec, i), 1))
                     for i in range(n)])


def test_sparse_wcm_link_count_matches_bernoulli_oracle(ten_node):
    p = _link_probs(ten_node)
    links = _link_counts(ten_node, NullModelSpec(seed=7), 1000)
    assert abs(links.mean() - p.sum()) < 3 * np.sqrt(np.sum(p * (1 - p)) / 1000)


def test_chung_lu_link_deficit(lesmis):
    # before clamping, sum_{i<j} k_i k_j / 2m = m - sum(k^2) / 4m
    k = lesmis.degrees.astype(float)
    m = lesmis.num_links
    iu = np.triu_indices(lesmis.n, 1)
    raw = k[iu[0]] * k[iu[1]] / (2 * m)
    assert raw.sum() == pytest.approx(m - np.sum(k ** 2) / (4 * m))
    assert _link_probs(lesmis).sum() <= raw.sum()


@pytest.mark.xfail(strict=True, reason="Chung-Lu draws omit the self-pair term, so the mean "
                   "link count sits sum(k^2)/4m (about 6 links) below m on this network")
def test_sparse_wcm_link_count_near_m(lesmis):
    links = _link_counts(lesmis, NullModelSpec(seed=7), 1000)
    assert abs(links.mean() - lesmis.num_links) < 3 * links.std(ddof=1) / np.sqrt(1000)


@pytest.mark.xfail(strict=True, reason="base weight 1 per sampled link plus a residual budget "
                   "only matches strengths on average over nodes, not per node")
def test_sparse_wcm_binary_strength_moment(lesmis):
    g = WeightedGraph(lesmis.node_labels, (lesmis.weights > 0).astype(float))
    spec = NullModelSpec(seed=3)
    S = np.array([sample_sparse_wcm(g, spec, i).sum(axis=1) for i in range(1000)])
    se = S.std(axis=0, ddof=1) / np.sqrt(1000)
    assert np.all(np.abs(S.mean(axis=0) - g.strengths) < 3 * se)


def test_sparse_wcm_binary_strength_close(lesmis):
    g = WeightedGraph(lesmis.node_labels, (lesmis.weights > 0).astype(float))
    ens = build_ensemble(g, NullModelSpec(num_samples=1000, seed=3))
    np.testing.assert_allclose(ens.expectation.sum(axis=1), g.strengths, rtol=0.1)


def test_sparse_wcm_total_weight_budget(ten_node):
    target = ten_node.strengths.sum() / 2
    conserve = NullModelSpec(seed=8)
    totals = np.array([np.triu(sample_sparse_wcm(ten_node, conserve, i), 1).sum()
                       for i in range(1000)])
    assert abs(totals.mean() - target) < 3 * totals.std(ddof=1) / np.sqrt(1000)
    literal = NullModelSpec(seed=8, sparse_budget="literal")
    diffs = []
    for i in range(1000):
        S = np.triu(sample_sparse_wcm(ten_node, literal, i), 1)
        diffs.append(S.sum() - (target - np.count_nonzero(S)))
    diffs = np.array(diffs)
    assert abs(diffs.mean()) < 3 * diffs.std(ddof=1) / np.sqrt(1000)


def test_sparse_weights_only_on_sampled_links(ten_node):
    spec = NullModelSpec(seed=9)
    for i in range(50):
        S = sample_sparse_wcm(ten_node, spec, i)
        _check_sample(S)
        assert np.all(S[S > 0] >= 1)


def test_determinism_and_independence(ten_node):
    spec = NullModelSpec(seed=123)
    np.testing.assert_array_equal(sample_sparse_wcm(ten_node, spec, 4),
                                  sample_sparse_wcm(ten_node, spec, 4))
    assert not np.array_equal(sample_sparse_wcm(ten_node, spec, 4),
                              sample_sparse_wcm(ten_node, spec, 5))
    a = sample_rng(1, 0).random(4)
    b = sample_rng(2, 0).random(4)
    assert not np.array_equal(a, b)


def test_kappa_grid():
    W = np.array([[0, 0.5, 1.25], [0.5, 0, 0.75], [1.25, 0.75, 0]])
    g = WeightedGraph.from_matrix(W)
    for kind in (FULL_WCM, SPARSE_WCM):
        spec = NullModelSpec(kind=kind, kappa=4, seed=1)
        for i in range(20):
            S = build_ensemble(g, spec).sample(i)
            np.testing.assert_allclose(S * 4, np.round(S * 4), atol=1e-12)


def test_stub_matching_two_nodes():
    g = WeightedGraph.from_matrix([[0, 2], [2, 0]])
    spec = NullModelSpec(kind=FULL_WCM, sampler=STUB_MATCHING)
    np.testing.assert_array_equal(sample_stub_matching(g, spec, 0), [[0, 2], [2, 0]])


def test_stub_matching_conserves_strength():
    g = WeightedGraph.from_matrix(SIX)
    spec = NullModelSpec(kind=FULL_WCM, sampler=STUB_MATCHING, seed=1)
    for i in range(200):
        S = sample_stub_matching(g, spec, i)
        _check_sample(S)
        diff = g.strengths - S.sum(axis=1)
        assert diff.min() >= 0 and diff.sum() <= 1


def test_stub_matching_retry_budget():
    # star with strengths {2, 1, 1}: pairing the two leaves first strands the hub's stubs
    star = WeightedGraph.from_matrix([[0, 1, 1], [1, 0, 0], [1, 0, 0]])
    strict = NullModelSpec(kind=FULL_WCM, sampler=STUB_MATCHING, stub_retries=0)
    with pytest.raises(NullModelError):
        for i in range(200):
            sample_stub_matching(star, strict, i)
    patient = NullModelSpec(kind=FULL_WCM, sampler=STUB_MATCHING, stub_retries=100)
    for i in range(50):
        np.testing.assert_array_equal(sample_stub_matching(star, patient, i), star.weights)


def _pooled(samples):
    v = np.asarray(samples, dtype=int).ravel()
    return np.bincount(v, minlength=64)[:64] / v.size


def _tv(a, b):
    return 0.5 * np.abs(a - b).sum()


def _stub_samples(g, n, seed):
    spec = NullModelSpec(kind=FULL_WCM, sampler=STUB_MATCHING, seed=seed)
    iu = np.triu_indices(g.n, 1)
    return np.array([sample_stub_matching(g, spec, i)[iu] for i in range(n)])


def test_stub_matching_matches_uniform_pairing_oracle():
    g = WeightedGraph.from_matrix(SIX)
    ours = _stub_samples(g, 5000, 3)
    # oracle: shuffle all stubs, pair neighbours, reject any self-pairing
    rng = np.random.default_rng(99)
    stubs = np.repeat(np.arange(6), g.strengths.astype(int))
    iu = np.triu_indices(6, 1)
    ref = []
    while len(ref) < 5000:
        pairs = rng.permutation(stubs).reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        M = np.zeros((6, 6))
        np.add.at(M, (pairs[:, 0], pairs[:, 1]), 1)
        ref.append((M + M.T)[iu])
    assert _tv(_pooled(ours), _pooled(ref)) < 0.05


@pytest.mark.xfail(strict=True, reason="per-pair stub counts are binomial-like with success "
                   "probability s_j/sum(s), which stays near 1/5 on six nodes; their spread is "
                   "measurably narrower than the Poisson sampler's")
def test_stub_matching_close_to_poisson_six_nodes():
    g = WeightedGraph.from_matrix(SIX)
    stub = _stub_samples(g, 5000, 3)
    spec = NullModelSpec(kind=FULL_WCM, seed=4)
    iu = np.triu_indices(6, 1)
    pois = np.array([sample_full_wcm(g, spec, i)[iu] for i in range(5000)])
    assert _tv(_pooled(stub), _pooled(pois)) < 0.05


def test_ensemble_expectations(ten_node):
    full = build_ensemble(ten_node, NullModelSpec(kind=FULL_WCM, num_samples=3))
    full2 = build_ensemble(ten_node, NullModelSpec(kind=FULL_WCM, num_samples=30))
    np.testing.assert_array_equal(full.expectation, full2.expectation)
    one = build_ensemble(ten_node, NullModelSpec(num_samples=1, seed=2))
    np.testing.assert_array_equal(one.expectation, one.sample(0))
    ens = build_ensemble(ten_node, NullModelSpec(num_samples=40, seed=2), retain=True)
    np.testing.assert_allclose(ens.expectation, ens.samples.mean(axis=0))


@pytest.mark.xfail(strict=True, reason="the sparse model conserves total weight, but "
                   "weight placed in proportion to s_i s_j over sampled links misallocates "
                   "it between nodes")
def test_sparse_expectation_row_sums(ten_node):
    N = 400
    ens = build_ensemble(ten_node, NullModelSpec(num_samples=N, seed=12))
    rows = np.array([S.sum(axis=1) for S in ens])
    se = rows.std(axis=0, ddof=1) / np.sqrt(N)
    assert np.all(np.abs(ens.expectation.sum(axis=1) - ten_node.strengths) < 3 * se + 1e-9)


def test_sparse_expectation_total(ten_node):
    N = 400
    ens = build_ensemble(ten_node, NullModelSpec(num_samples=N, seed=12))
    totals = np.array([S.sum() for S in ens])
    se = totals.std(ddof=1) / np.sqrt(N)
    assert abs(ens.expectation.sum() - ten_node.weights.sum()) < 3 * se


def test_ensemble_independent_of_jobs(ten_node):
    spec = NullModelSpec(num_samples=23, seed=5)
    a = build_ensemble(ten_node, spec, jobs=1)
    b = build_ensemble(ten_node, spec, jobs=4)
    np.testing.assert_array_equal(a.expectation, b.expectation)
    np.testing.assert_array_equal(np.stack(a.map(np.sum)), np.stack(b.map(np.sum, jobs=3)))


def test_dump_samples_round_trip(tmp_path, ten_node):
    from netspectra.graph import load_edge_list

    labelled = WeightedGraph(tuple(f"v{i}" for i in range(10)), ten_node.weights)
    ens = build_ensemble(labelled, NullModelSpec(num_samples=3, seed=1))
    paths = dump_samples(ens, tmp_path)
    assert [p.name for p in paths] == ["sample_0.tsv", "sample_1.tsv", "sample_2.tsv"]
    back = load_edge_list(paths[1].read_text())
    idx = [labelled.index_of(x) for x in back.node_labels]
    np.testing.assert_array_equal(back.weights, ens.sample(1)[np.ix_(idx, idx)])


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 12), st.integers(0, 2**32 - 1), st.sampled_from([FULL_WCM, SPARSE_WCM]))
def test_samples_are_valid_graphs(n, seed, kind):
    g = random_graph(n, 0.5, np.random.default_rng(seed))
    if g.num_links == 0:
        return
    ens = build_ensemble(g, NullModelSpec(kind=kind, num_samples=3, seed=seed))
    for S in ens:
        _check_sample(S)
        np.testing.assert_array_equal(S, np.round(S))

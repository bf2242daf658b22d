import numpy as np
import pytest

from netspectra.graph import WeightedGraph, load_les_miserables


def block_graph(sizes, w_in=1.0, w_out=0.0):
    """Dense blocks with ``w_in`` inside and ``w_out`` between blocks."""
    labels = np.repeat(np.arange(len(sizes)), sizes)
    W = np.where(labels[:, None] == labels[None, :], w_in, w_out).astype(float)
    np.fill_diagonal(W, 0)
    return WeightedGraph.from_matrix(W), labels


def complete_bipartite(a, b, w=1.0):
    n = a + b
    W = np.zeros((n, n))
    W[:a, a:] = w
    W[a:, :a] = w
    return WeightedGraph.from_matrix(W)


def random_graph(n, p, rng, max_weight=5):
    A = np.triu(rng.random((n, n)) < p, 1)
    W = np.where(A, rng.integers(1, max_weight + 1, size=(n, n)), 0).astype(float)
    return WeightedGraph.from_matrix(W + W.T)


@pytest.fixture(scope="session")
def lesmis():
    return load_les_miserables()


@pytest.fixture
def triangle():
    return WeightedGraph.from_matrix(np.ones((3, 3)) - np.eye(3), ["a", "b", "c"])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opensis.graph import (
    Adjacency,
    CannotEmpty,
    InvalidProbability,
    attach_node,
    expected_adjacency,
    largest_eigenvalue,
    remove_node,
    sample_er_graph,
)


def complete(n):
    return Adjacency(np.ones((n, n)) - np.eye(n))


def test_er_extremes():
    rng = np.random.default_rng(0)
    assert np.array_equal(sample_er_graph(3, 0.0, rng).weights, np.zeros((3, 3)))
    assert sample_er_graph(3, 1.0, rng) == complete(3)


def test_er_mean_edge_count():
    # edge count ~ Binomial(n(n-1)/2, p)
    rng = np.random.default_rng(1)
    n, p, reps = 50, 0.5, 10_000
    pairs = n * (n - 1) // 2
    counts = np.array([sample_er_graph(n, p, rng).weights.sum() / 2 for _ in range(reps)])
    se = np.sqrt(pairs * p * (1 - p) / reps)
    assert abs(counts.mean() - 612.5) < 3 * se


@pytest.mark.parametrize("p", [-0.1, 1.5])
def test_invalid_probability(p):
    rng = np.random.default_rng(0)
    with pytest.raises(InvalidProbability):
        sample_er_graph(3, p, rng)
    with pytest.raises(InvalidProbability):
        expected_adjacency(3, p)
    with pytest.raises(InvalidProbability):
        attach_node(complete(2), p, rng)


@given(n=st.integers(1, 40), p=st.floats(0, 1), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_sampled_graph_invariants(n, p, seed):
    a = sample_er_graph(n, p, np.random.default_rng(seed))
    a.validate()
    assert set(np.unique(a.weights)) <= {0.0, 1.0}


def test_expected_adjacency_examples():
    assert np.array_equal(expected_adjacency(2, 0.5).weights, [[0, 0.5], [0.5, 0]])
    assert np.array_equal(expected_adjacency(1, 0.7).weights, [[0.0]])
    w = expected_adjacency(50, 0.5).weights
    off = w[~np.eye(50, dtype=bool)]
    assert np.all(off == 0.5) and np.all(np.diag(w) == 0)


def test_largest_eigenvalue_examples():
    assert largest_eigenvalue(expected_adjacency(50, 0.5)).lambda1 == pytest.approx(24.5, abs=1e-9)
    assert largest_eigenvalue(Adjacency(np.zeros((5, 5)))).lambda1 == 0.0
    assert largest_eigenvalue(complete(4)).lambda1 == pytest.approx(3.0, abs=1e-9)


def test_largest_eigenvalue_matches_power_iteration():
    a = sample_er_graph(60, 0.3, np.random.default_rng(3))
    v = np.ones(60)
    for _ in range(5000):
        v = a.weights @ v
        v /= np.linalg.norm(v)
    assert largest_eigenvalue(a).lambda1 == pytest.approx(v @ a.weights @ v, abs=1e-9)


def test_er_spectrum_concentrates():
    rng = np.random.default_rng(4)
    lam = [largest_eigenvalue(sample_er_graph(200, 0.5, rng)).lambda1 for _ in range(100)]
    assert abs(np.mean(lam) - 0.5 * 199) < 0.05 * 0.5 * 199


def test_attach_node_examples():
    rng = np.random.default_rng(5)
    a = attach_node(Adjacency(np.zeros((1, 1))), 1.0, rng)
    assert np.array_equal(a.weights, [[0, 1], [1, 0]])
    b = attach_node(complete(4), 0.0, rng)
    assert b.n == 5 and b.weights[4].sum() == 0
    assert np.array_equal(b.weights[:4, :4], complete(4).weights)


def test_attach_node_mean_degree():
    rng = np.random.default_rng(6)
    base = sample_er_graph(50, 0.5, rng)
    deg = np.array([attach_node(base, 0.5, rng).weights[50].sum() for _ in range(10_000)])
    assert abs(deg.mean() - 25) < 3 * np.sqrt(50 * 0.25 / 10_000)


def test_remove_node_examples():
    path = Adjacency(np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], float))
    assert np.array_equal(remove_node(path, 1).weights, np.zeros((2, 2)))
    for j in range(3):
        assert remove_node(complete(3), j) == complete(2)
    with pytest.raises(CannotEmpty):
        remove_node(Adjacency(np.zeros((1, 1))), 0)
    with pytest.raises(IndexError):
        remove_node(complete(3), 3)


@given(n=st.integers(1, 30), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_attach_then_remove_roundtrip(n, seed):
    rng = np.random.default_rng(seed)
    a = sample_er_graph(n, 0.4, rng)
    assert remove_node(attach_node(a, 0.4, rng), n) == a


def test_adjacency_is_read_only():
    a = complete(3)
    with pytest.raises(ValueError):
        a.weights[0, 1] = 5.0

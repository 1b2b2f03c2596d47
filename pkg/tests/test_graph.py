"""Digraphs, Laplacians, and the spectral constants of both modes."""

import numpy as np
import pytest

from consensim import (
    DirectedGraph,
    GraphStructureError,
    contains_spanning_tree,
    is_strongly_connected,
    laplacian,
    leader_constants,
    partition_leader,
    strong_constants,
)
from consensim.reference import leader_ring_graph
from conftest import random_spanning_tree_graph, random_strong_graph

# high-precision evaluations of the closed-form constants
LAM0_TWO_FOLLOWERS = 1.7928932188134525  # (5 - sqrt(2)) / 2
LAM0_REFERENCE = 1.7242070927233164
LAM2_RING5 = 0.276393202250021  # (5 - sqrt(5)) / 10


def two_follower_graph():
    # leader feeds both followers; follower 2 also hears follower 1
    return DirectedGraph.from_edges(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])


def cycle_graph(n):
    return DirectedGraph.from_edges(n, [(i, (i + 1) % n, 1.0) for i in range(n)])


# --- construction -------------------------------------------------------

def test_from_edges_rejects_self_loop():
    with pytest.raises(GraphStructureError, match="self-loop"):
        DirectedGraph.from_edges(2, [(0, 0, 1.0)])


def test_from_edges_rejects_out_of_range():
    with pytest.raises(GraphStructureError, match="range"):
        DirectedGraph.from_edges(2, [(0, 2, 1.0)])


def test_from_edges_rejects_nonpositive_weight():
    with pytest.raises(GraphStructureError, match="positive"):
        DirectedGraph.from_edges(2, [(0, 1, 0.0)])


def test_from_edges_rejects_duplicate():
    with pytest.raises(GraphStructureError, match="duplicate"):
        DirectedGraph.from_edges(2, [(0, 1, 1.0), (0, 1, 2.0)])


def test_weights_are_read_only():
    g = cycle_graph(3)
    with pytest.raises(ValueError):
        g.weights[0, 0] = 5.0


# --- laplacian ----------------------------------------------------------

def test_laplacian_cycle3():
    lap = laplacian(cycle_graph(3))
    expected = np.array([[1.0, 0.0, -1.0], [-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]])
    assert np.array_equal(lap, expected)


def test_laplacian_structure_corpus():
    # dyadic weights make the cancellations exact, not just small
    rng = np.random.default_rng(3)
    ones = None
    for _ in range(30):
        n = int(rng.integers(2, 9))
        g = random_spanning_tree_graph(rng, n, extra_edges=int(rng.integers(0, 5)))
        lap = laplacian(g)
        ones = np.ones(n)
        assert np.all(lap @ ones == 0.0)
        assert np.all(lap.sum(axis=1) == 0.0)
        off = lap - np.diag(np.diag(lap))
        assert np.all(off <= 0.0)


def test_laplacian_simple_zero_eigenvalue_on_trees():
    rng = np.random.default_rng(13)
    for _ in range(20):
        n = int(rng.integers(2, 9))
        g = random_spanning_tree_graph(rng, n, extra_edges=int(rng.integers(0, 4)))
        s = np.linalg.svd(laplacian(g), compute_uv=False)
        assert s[-1] <= 1e-9 * max(1.0, s[0])
        if n > 1:
            assert s[-2] > 1e-9 * max(1.0, s[0])


# --- reachability -------------------------------------------------------

def test_spanning_tree_path_graph():
    g = DirectedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
    assert contains_spanning_tree(g, root=0)
    assert not contains_spanning_tree(g, root=2)


def test_spanning_tree_disconnected():
    g = DirectedGraph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])
    assert not contains_spanning_tree(g, root=0)


def test_strongly_connected():
    assert is_strongly_connected(cycle_graph(4))
    path = DirectedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
    assert not is_strongly_connected(path)
    two = DirectedGraph.from_edges(2, [(0, 1, 1.0), (1, 0, 1.0)])
    assert is_strongly_connected(two)


# --- leader partition and constants -------------------------------------

def test_partition_reference_graph():
    part = partition_leader(laplacian(leader_ring_graph()))
    l1_expected = np.array(
        [
            [2.0, 0.0, 0.0, 0.0, 0.0, -1.0],
            [-1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, -1.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, -1.0, 1.0],
        ]
    )
    assert np.array_equal(part.l1, l1_expected)
    assert np.array_equal(part.l2, np.array([[-1.0], [0.0], [0.0], [0.0], [0.0], [0.0]]))


def test_partition_rejects_led_leader():
    g = DirectedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])
    with pytest.raises(GraphStructureError, match="leader"):
        partition_leader(laplacian(g))


def test_leader_constants_two_followers():
    lc = leader_constants(partition_leader(laplacian(two_follower_graph())))
    assert np.allclose(lc.q, [1.5, 0.5], atol=1e-12)
    assert abs(lc.lambda_hat0 - LAM0_TWO_FOLLOWERS) <= 1e-12


def test_leader_constants_reference_graph():
    lc = leader_constants(partition_leader(laplacian(leader_ring_graph())))
    assert np.allclose(lc.q, [6.0, 11.0, 10.0, 9.0, 8.0, 7.0], atol=1e-9)
    assert abs(lc.lambda_hat0 - LAM0_REFERENCE) <= 1e-12
    assert np.array_equal(lc.g, np.diag(lc.q))


@pytest.mark.filterwarnings("ignore::scipy.linalg.LinAlgWarning")
def test_leader_constants_need_spanning_tree():
    # follower 2 is unreachable: no in-edges at all
    g = DirectedGraph.from_edges(3, [(0, 1, 1.0)])
    with pytest.raises(GraphStructureError, match="spanning tree"):
        leader_constants(partition_leader(laplacian(g)))


def test_leader_constants_positive_corpus():
    rng = np.random.default_rng(29)
    for _ in range(30):
        n = int(rng.integers(2, 8))
        g = random_spanning_tree_graph(rng, n, extra_edges=int(rng.integers(0, 4)))
        lc = leader_constants(partition_leader(laplacian(g)))
        assert np.all(lc.q > 0)
        assert lc.lambda_hat0 > 0
        s = lc.g @ lc.l1 + lc.l1.T @ lc.g
        assert np.linalg.eigvalsh(s).min() > 0


def test_leader_constants_follower_permutation():
    base = leader_constants(partition_leader(laplacian(leader_ring_graph())))
    # relabel followers with a fixed permutation (leader stays first)
    perm = [0, 3, 1, 5, 2, 6, 4]
    w = leader_ring_graph().weights
    pw = w[np.ix_(perm, perm)]
    edges = [
        (j, i, float(pw[i, j]))
        for i in range(7)
        for j in range(7)
        if pw[i, j] > 0
    ]
    permuted = leader_constants(
        partition_leader(laplacian(DirectedGraph.from_edges(7, edges)))
    )
    follower_perm = [p - 1 for p in perm[1:]]
    assert np.allclose(permuted.q, base.q[follower_perm], atol=1e-9)
    assert abs(permuted.lambda_hat0 - base.lambda_hat0) <= 1e-12


# --- leaderless constants -----------------------------------------------

def test_strong_constants_cycle3():
    sc = strong_constants(laplacian(cycle_graph(3)))
    assert np.allclose(sc.r, np.full(3, 1.0 / 3.0), atol=1e-12)
    assert abs(sc.lambda2_hat - 1.0) <= 1e-12
    assert abs(sc.r.sum() - 1.0) <= 1e-12


def test_strong_constants_ring5():
    sc = strong_constants(laplacian(cycle_graph(5)))
    assert np.allclose(sc.r, np.full(5, 0.2), atol=1e-12)
    assert abs(sc.lambda2_hat - LAM2_RING5) <= 1e-12


def test_strong_constants_two_vertices():
    g = DirectedGraph.from_edges(2, [(0, 1, 1.0), (1, 0, 1.0)])
    sc = strong_constants(laplacian(g))
    assert abs(sc.lambda2_hat - 2.0) <= 1e-12


def test_strong_constants_reject_weak_graph():
    path = DirectedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
    with pytest.raises(GraphStructureError, match="strongly connected"):
        strong_constants(laplacian(path))


def test_projected_quadratic_lower_bound():
    # for r-orthogonal x: x' Lhat x >= (lambda2 / N) x'x
    rng = np.random.default_rng(37)
    for _ in range(5):
        n = int(rng.integers(2, 9))
        g = random_strong_graph(rng, n, extra_edges=int(rng.integers(0, 4)))
        sc = strong_constants(laplacian(g))
        for _ in range(20):
            x = rng.standard_normal(n)
            x = x - np.ones(n) * (sc.r @ x)  # now r'x = 0
            lhs = x @ sc.l_hat @ x
            rhs = sc.lambda2_hat / n * (x @ x)
            assert lhs >= rhs - 1e-9


def test_strong_constants_left_null_vector():
    rng = np.random.default_rng(43)
    for _ in range(10):
        n = int(rng.integers(2, 8))
        g = random_strong_graph(rng, n, extra_edges=int(rng.integers(0, 4)))
        lap = laplacian(g)
        sc = strong_constants(lap)
        assert np.all(sc.r > 0)
        assert np.linalg.norm(sc.r @ lap) <= 1e-9 * max(1.0, np.abs(lap).max())

"""Shared corpus generators for the seeded property tests.

Weights are drawn from a dyadic palette so Laplacian row sums cancel
exactly in floating point; that lets the structural tests assert exact
zeros instead of tolerances.
"""

import numpy as np

from consensim import DirectedGraph

DYADIC_WEIGHTS = (0.5, 1.0, 1.5, 2.0)


def random_spanning_tree_graph(rng, n_vertices, extra_edges=0, rooted_at=0):
    """Digraph whose every vertex is reachable from the root.

    Vertex i > 0 receives one edge from a random earlier vertex, which
    guarantees a directed spanning tree rooted at vertex 0; extra random
    edges (never into the root) are layered on top.
    """
    edges = {}
    for head in range(1, n_vertices):
        tail = int(rng.integers(0, head))
        edges[(tail, head)] = float(rng.choice(DYADIC_WEIGHTS))
    for _ in range(extra_edges):
        tail = int(rng.integers(0, n_vertices))
        head = int(rng.integers(1, n_vertices))
        if tail != head and (tail, head) not in edges:
            edges[(tail, head)] = float(rng.choice(DYADIC_WEIGHTS))
    assert rooted_at == 0
    return DirectedGraph.from_edges(
        n_vertices, [(t, h, w) for (t, h), w in edges.items()]
    )


def random_strong_graph(rng, n_vertices, extra_edges=2):
    """Strongly connected digraph: a directed cycle plus random chords."""
    edges = {}
    for i in range(n_vertices):
        edges[(i, (i + 1) % n_vertices)] = float(rng.choice(DYADIC_WEIGHTS))
    for _ in range(extra_edges):
        tail = int(rng.integers(0, n_vertices))
        head = int(rng.integers(0, n_vertices))
        if tail != head and (tail, head) not in edges:
            edges[(tail, head)] = float(rng.choice(DYADIC_WEIGHTS))
    return DirectedGraph.from_edges(
        n_vertices, [(t, h, w) for (t, h), w in edges.items()]
    )


def random_stabilizable_pair(rng, n_max=4):
    """(A, B) with every mode solidly controllable.

    Pairs whose controllability matrix has a small least singular value
    are redrawn: the Riccati solution for such pairs is so ill scaled
    that no dense solver can evaluate its residual below 1e-10.
    """
    while True:
        n = int(rng.integers(1, n_max + 1))
        m = int(rng.integers(1, 3))
        a = rng.standard_normal((n, n))
        b = rng.standard_normal((n, m))
        ctrb = np.hstack([np.linalg.matrix_power(a, k) @ b for k in range(n)])
        if np.linalg.svd(ctrb, compute_uv=False)[-1] >= 0.1:
            return a, b

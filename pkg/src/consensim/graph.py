"""Weighted directed graphs, their Laplacians, and the spectral constants
that drive the residual-set bounds.

Vertex indices are 0-based throughout the code; the scenario file format
uses 1-based ids and converts at the parsing boundary. ``weights[i, j] > 0``
means there is an edge from vertex j to vertex i, i.e. j is a neighbor of i
and information flows j -> i.
"""

import numpy as np
from dataclasses import dataclass

from .numerics import lu_solve, sym_eig


class GraphStructureError(ValueError):
    """The graph lacks the connectivity structure an operation requires."""


def _lock(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DirectedGraph:
    """Weighted digraph on vertices {0, ..., n-1}.

    weights : (n, n) nonnegative matrix with zero diagonal;
        weights[i, j] is the weight agent i places on neighbor j.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weights must be square, got shape {w.shape}")
        if w.shape[0] < 1:
            raise ValueError("graph needs at least one vertex")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights contain non-finite entries")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if np.any(np.diag(w) != 0):
            raise ValueError("self-loops are not allowed (diagonal must be zero)")
        object.__setattr__(self, "weights", _lock(w))

    @property
    def n_vertices(self):
        return self.weights.shape[0]

    @classmethod
    def from_edges(cls, n, edges):
        """Build from an iterable of (tail, head, weight) triples, 0-based.

        Each triple adds the edge tail -> head. Duplicate edges are
        rejected rather than summed.
        """
        w = np.zeros((n, n))
        for tail, head, weight in edges:
            tail, head = int(tail), int(head)
            if not (0 <= tail < n and 0 <= head < n):
                raise GraphStructureError(
                    f"edge ({tail}, {head}) out of range for n={n}"
                )
            if tail == head:
                raise GraphStructureError(
                    f"self-loop on vertex {tail} is not allowed"
                )
            if weight <= 0:
                raise GraphStructureError(
                    f"edge ({tail}, {head}) needs positive weight"
                )
            if w[head, tail] != 0:
                raise GraphStructureError(f"duplicate edge ({tail}, {head})")
            w[head, tail] = weight
        return cls(weights=w)


def laplacian(g):
    """Graph Laplacian: L_ii = sum_j w_ij, L_ij = -w_ij for i != j.

    Rows sum to zero, so the all-ones vector is always in the null space.
    """
    w = g.weights
    lap = -w.copy()
    np.fill_diagonal(lap, w.sum(axis=1))
    return lap


def _reachable_from(w, root):
    # BFS over edges j -> i, i.e. successors of v are the nonzero rows of column v.
    n = w.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[root] = True
    frontier = [root]
    while frontier:
        nxt = []
        for v in frontier:
            for i in np.nonzero(w[:, v])[0]:
                if not seen[i]:
                    seen[i] = True
                    nxt.append(int(i))
        frontier = nxt
    return seen


def contains_spanning_tree(g, root=0):
    """Whether every vertex is reachable from ``root`` along directed edges."""
    n = g.n_vertices
    if not (0 <= root < n):
        raise ValueError(f"root {root} out of range for {n} vertices")
    return bool(_reachable_from(g.weights, root).all())


def is_strongly_connected(g):
    """Strong connectivity via forward and reverse BFS from vertex 0."""
    w = g.weights
    if not _reachable_from(w, 0).all():
        return False
    return bool(_reachable_from(w.T, 0).all())


@dataclass(frozen=True)
class LeaderPartition:
    """Leader-follower split of a Laplacian with the leader at vertex 0.

    l1 : (N-1, N-1) follower-follower block, a nonsingular M-matrix when the
        graph has a spanning tree rooted at the leader
    l2 : (N-1, 1) follower-leader column
    """

    l1: np.ndarray
    l2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "l1", _lock(self.l1))
        object.__setattr__(self, "l2", _lock(self.l2))


def _check_laplacian(lap):
    lap = np.asarray(lap, dtype=float)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise ValueError(f"Laplacian must be square, got shape {lap.shape}")
    if not np.all(np.isfinite(lap)):
        raise ValueError("Laplacian contains non-finite entries")
    off = lap - np.diag(np.diag(lap))
    if np.any(off > 1e-12):
        raise ValueError("Laplacian off-diagonal entries must be nonpositive")
    scale = max(1.0, float(np.abs(lap).max()))
    if np.any(np.abs(lap.sum(axis=1)) > 1e-9 * scale):
        raise ValueError("Laplacian rows must sum to zero")
    return lap


def partition_leader(lap):
    """Split a Laplacian into follower blocks, leader at vertex 0.

    The leader row must be identically zero (the leader takes no input from
    the team); anything else is rejected.
    """
    lap = _check_laplacian(lap)
    n = lap.shape[0]
    if n < 2:
        raise ValueError("leader partition needs at least 2 vertices")
    if np.any(lap[0, :] != 0):
        raise GraphStructureError(
            "leader row of the Laplacian is nonzero: the leader vertex must "
            "have no incoming edges"
        )
    return LeaderPartition(l1=lap[1:, 1:], l2=lap[1:, :1])


@dataclass(frozen=True)
class LeaderConstants:
    """Spectral constants of a leader-rooted graph.

    q : positive vector solving L1^T q = 1
    g : diag(q)
    lambda_hat0 : smallest eigenvalue of G L1 + L1^T G, positive for a
        leader-rooted spanning tree
    l1 : the follower block the constants came from (kept for the bound
        formulas, which also need sigma_max(G L1))
    """

    q: np.ndarray
    g: np.ndarray
    lambda_hat0: float
    l1: np.ndarray

    def __post_init__(self):
        for name in ("q", "g", "l1"):
            object.__setattr__(self, name, _lock(getattr(self, name)))


def leader_constants(p):
    """Compute q, G = diag(q) and lambda_hat0 from a leader partition.

    Raises GraphStructureError when L1 is singular or the constants come out
    nonpositive; both mean the graph has no directed spanning tree rooted at
    the leader vertex.
    """
    l1 = p.l1
    m = l1.shape[0]
    try:
        q = lu_solve(l1.T, np.ones(m))
    except np.linalg.LinAlgError as exc:
        raise GraphStructureError(
            "follower block is singular: the graph needs a directed spanning "
            "tree rooted at the leader vertex"
        ) from exc
    if np.any(q <= 0):
        raise GraphStructureError(
            "q has nonpositive entries: the graph needs a directed spanning "
            "tree rooted at the leader vertex"
        )
    g = np.diag(q)
    lam = float(sym_eig(g @ l1 + l1.T @ g)[0][0])
    if lam <= 0:
        raise GraphStructureError(
            "G L1 + L1^T G is not positive definite: the graph needs a "
            "directed spanning tree rooted at the leader vertex"
        )
    return LeaderConstants(q=q, g=g, lambda_hat0=lam, l1=l1)


@dataclass(frozen=True)
class StrongConstants:
    """Spectral constants of a strongly connected graph.

    r : positive left null vector of the Laplacian, normalized to sum 1
    r_mat : diag(r)
    l_hat : R L + L^T R, symmetric positive semidefinite with a simple zero
    lambda2_hat : smallest nonzero eigenvalue of l_hat
    laplacian : the Laplacian the constants came from
    """

    r: np.ndarray
    r_mat: np.ndarray
    l_hat: np.ndarray
    lambda2_hat: float
    laplacian: np.ndarray

    def __post_init__(self):
        for name in ("r", "r_mat", "l_hat", "laplacian"):
            object.__setattr__(self, name, _lock(getattr(self, name)))


def strong_constants(lap):
    """Left null vector r, R = diag(r) and lambda2 of L_hat = R L + L^T R.

    Strong connectivity is checked by BFS up front (the adjacency pattern is
    recovered from the off-diagonal of L); the null vector is then found by
    pinning r_0 = 1 and LU solving the remaining equations of L^T r = 0.
    """
    lap = _check_laplacian(lap)
    n = lap.shape[0]
    if n < 2:
        raise ValueError("strong constants need at least 2 vertices")
    adj = -(lap - np.diag(np.diag(lap)))
    adj[adj < 0] = 0.0
    if not (_reachable_from(adj, 0).all() and _reachable_from(adj.T, 0).all()):
        raise GraphStructureError("graph is not strongly connected")
    lt = lap.T
    try:
        rest = lu_solve(lt[1:, 1:], -lt[1:, 0])
    except np.linalg.LinAlgError as exc:
        raise GraphStructureError(
            "left null vector solve is singular: graph is not strongly connected"
        ) from exc
    r = np.concatenate(([1.0], rest))
    scale = max(1.0, float(np.abs(lap).max()))
    if np.linalg.norm(lt @ r) > 1e-10 * scale * np.linalg.norm(r):
        raise GraphStructureError(
            "left null vector residual too large: graph is not strongly connected"
        )
    if np.any(r <= 0):
        raise GraphStructureError(
            "left null vector has nonpositive entries: graph is not strongly "
            "connected"
        )
    r = r / r.sum()
    r_mat = np.diag(r)
    l_hat = r_mat @ lap + lap.T @ r_mat
    evals = sym_eig(l_hat)[0]
    if abs(evals[0]) > 1e-9 * scale:
        raise GraphStructureError(
            "L_hat lost its zero eigenvalue; Laplacian structure is broken"
        )
    lam2 = float(evals[1])
    if lam2 <= 0:
        raise GraphStructureError(
            "second eigenvalue of L_hat is not positive: graph is not strongly "
            "connected"
        )
    return StrongConstants(r=r, r_mat=r_mat, l_hat=l_hat,
                           lambda2_hat=lam2, laplacian=lap)

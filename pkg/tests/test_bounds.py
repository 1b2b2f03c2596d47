"""Residual-set bounds for the two robust protocol variants.

Expected values were frozen from a 40-digit mpmath evaluation of the bound
formulas on the same graphs; the float implementation is required to agree
to 1e-9 relative.
"""

import numpy as np
import pytest

from consensim import (
    DirectedGraph,
    Trajectory,
    check_containment,
    design_gains,
    laplacian,
    leader_bound,
    leader_constants,
    leaderless_bound,
    omega_tilde_bound,
    partition_leader,
    strong_constants,
)
from consensim.reference import leader_ring_graph

RTOL = 1e-9


def rel(a, b):
    return abs(a - b) / max(abs(b), 1.0)


@pytest.fixture(scope="module")
def di():
    return design_gains(np.array([[0.0, 1.0], [0.0, 0.0]]),
                        np.array([[0.0], [1.0]]))


def two_follower_constants():
    g = DirectedGraph.from_edges(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])
    return leader_constants(partition_leader(laplacian(g)))


def cycle_constants(n):
    g = DirectedGraph.from_edges(n, [(i, (i + 1) % n, 1.0) for i in range(n)])
    return strong_constants(laplacian(g))


# --- omega_tilde_bound --------------------------------------------------

def test_omega_tilde_zero():
    assert omega_tilde_bound([0.0, 0.0]) == 0.0


def test_omega_tilde_pythagorean():
    assert abs(omega_tilde_bound([0.0, 3.0, 4.0]) - 5.0) < 1e-15


def test_omega_tilde_leader_offset():
    # followers each see 1 + 1 = 2: sqrt(2 * 4) = 2 sqrt(2)
    assert abs(omega_tilde_bound([1.0, 1.0, 1.0])
               - 2.8284271247461903) < 1e-15


def test_omega_tilde_rejects_short_input():
    with pytest.raises(ValueError, match="leader"):
        omega_tilde_bound([1.0])


def test_omega_tilde_rejects_negative():
    with pytest.raises(ValueError, match="nonnegative"):
        omega_tilde_bound([0.0, -0.1])


# --- leader_bound -------------------------------------------------------

def test_leader_bound_two_followers_frozen(di):
    b = leader_bound(two_follower_constants(), di,
                     phi=[0.1, 0.2], upsilon=[0.0, 0.3, 0.4])
    assert b.applicable
    assert b.delta == 0.1
    assert rel(b.tau, 0.36602540378443865) < RTOL
    assert rel(b.alpha, 51.56839724898771) < RTOL
    assert rel(b.pi, 61.745493974987134) < RTOL
    assert rel(b.radius_sq, 1268.2384785687193) < RTOL


def test_leader_bound_ring_frozen(di):
    lc = leader_constants(partition_leader(laplacian(leader_ring_graph())))
    b = leader_bound(lc, di, phi=np.full(6, 0.02),
                     upsilon=[0.0, 0.2, 0.1, 0.2, 0.3, 0.2, 0.0])
    assert rel(b.alpha, 3449.807335041415) < RTOL
    assert rel(b.pi, 103152.20950163496) < RTOL
    assert rel(b.radius_sq, 135740.07100309976) < RTOL


def test_leader_bound_inapplicable_above_tau(di):
    b = leader_bound(two_follower_constants(), di,
                     phi=[0.5, 0.6], upsilon=[0.0, 0.1, 0.1])
    assert not b.applicable
    assert b.radius_sq is None
    assert b.delta >= b.tau


def test_leader_bound_clean_case_drops_disturbance_term(di):
    lc = two_follower_constants()
    phi = [0.1, 0.2]
    b0 = leader_bound(lc, di, phi=phi, upsilon=[0.0, 0.0, 0.0])
    expected_pi = lc.lambda_hat0 / 24.0 * sum(phi) * (b0.alpha - 1.0) ** 2
    assert rel(b0.pi, expected_pi) < 1e-12


def test_leader_bound_validation(di):
    lc = two_follower_constants()
    with pytest.raises(ValueError, match="one entry per adaptive agent"):
        leader_bound(lc, di, phi=[0.1], upsilon=[0.0, 0.1, 0.1])
    with pytest.raises(ValueError, match="positive phi"):
        leader_bound(lc, di, phi=[0.1, 0.0], upsilon=[0.0, 0.1, 0.1])
    with pytest.raises(ValueError, match="one entry per agent"):
        leader_bound(lc, di, phi=[0.1, 0.1], upsilon=[0.0, 0.1])
    with pytest.raises(ValueError, match="nonnegative"):
        leader_bound(lc, di, phi=[0.1, 0.1], upsilon=[0.0, -0.1, 0.1])


def test_leader_bound_monotone_in_disturbance(di):
    lc = two_follower_constants()
    lo = leader_bound(lc, di, phi=[0.1, 0.1], upsilon=[0.0, 0.1, 0.1])
    hi = leader_bound(lc, di, phi=[0.1, 0.1], upsilon=[0.0, 0.1, 0.5])
    assert hi.radius_sq > lo.radius_sq


def test_leader_bound_shrinks_with_smaller_leak(di):
    # halving every rate shrinks the leak energy and widens tau - delta
    lc = two_follower_constants()
    base = leader_bound(lc, di, phi=[0.2, 0.2], upsilon=[0.0, 0.1, 0.1])
    half = leader_bound(lc, di, phi=[0.1, 0.1], upsilon=[0.0, 0.1, 0.1])
    assert half.radius_sq < base.radius_sq


def test_leader_bound_follower_permutation_invariant(di):
    base_lc = leader_constants(partition_leader(laplacian(leader_ring_graph())))
    phi = np.array([0.02, 0.03, 0.04, 0.05, 0.06, 0.07])
    ups = np.array([0.0, 0.2, 0.1, 0.2, 0.3, 0.2, 0.0])
    base = leader_bound(base_lc, di, phi=phi, upsilon=ups)

    # relabel followers: old follower j (0-based) becomes new position perm[j]
    perm = [0, 3, 1, 5, 2, 4]
    old_edges = [(0, 1, 1.0)] + [(i, i + 1, 1.0) for i in range(1, 6)] \
        + [(6, 1, 1.0)]
    edges = []
    for tail, head, w in old_edges:
        new_tail = 0 if tail == 0 else perm[tail - 1] + 1
        edges.append((new_tail, perm[head - 1] + 1, w))
    lc = leader_constants(
        partition_leader(laplacian(DirectedGraph.from_edges(7, edges))))
    phi_p, ups_p = np.empty(6), np.empty(7)
    ups_p[0] = ups[0]
    for j in range(6):
        phi_p[perm[j]] = phi[j]
        ups_p[perm[j] + 1] = ups[j + 1]
    permuted = leader_bound(lc, di, phi=phi_p, upsilon=ups_p)
    assert rel(permuted.alpha, base.alpha) < 1e-12
    assert rel(permuted.pi, base.pi) < 1e-12
    assert rel(permuted.radius_sq, base.radius_sq) < 1e-12


# --- leaderless_bound ---------------------------------------------------

def test_leaderless_bound_cycle3_frozen(di):
    b = leaderless_bound(cycle_constants(3), di,
                         phi=np.full(3, 0.1), upsilon=np.ones(3))
    assert b.applicable
    assert abs(b.beta - 74.0) < 1e-9
    assert rel(b.xi, 58.204166666666666) < RTOL
    assert rel(b.radius_sq, 1793.2506251289299) < RTOL


def test_leaderless_bound_ring5_frozen(di):
    b = leaderless_bound(cycle_constants(5), di,
                         phi=np.full(5, 0.02),
                         upsilon=[0.15, 0.2, 0.25, 0.3, 0.35])
    assert rel(b.beta, 355.2198067399882) < RTOL
    assert rel(b.xi, 39.50263521604623) < RTOL
    assert rel(b.radius_sq, 1559.4694097998963) < RTOL


def test_leaderless_bound_inapplicable(di):
    b = leaderless_bound(cycle_constants(3), di,
                         phi=np.full(3, 0.4), upsilon=np.zeros(3))
    assert not b.applicable
    assert b.radius_sq is None


def test_leaderless_default_floor_offset_is_beta_minus_one(di):
    sc = cycle_constants(3)
    phi, ups = np.full(3, 0.1), np.ones(3)
    auto = leaderless_bound(sc, di, phi=phi, upsilon=ups)
    explicit = leaderless_bound(sc, di, phi=phi, upsilon=ups,
                                floor_offset=auto.beta - 1.0)
    assert auto.xi == explicit.xi
    assert auto.radius_sq == explicit.radius_sq


def test_leaderless_zero_offset_isolates_disturbance_term(di):
    sc = cycle_constants(3)
    phi, ups = np.full(3, 0.1), np.ones(3)
    full = leaderless_bound(sc, di, phi=phi, upsilon=ups)
    tail_only = leaderless_bound(sc, di, phi=phi, upsilon=ups,
                                 floor_offset=0.0)
    leak_term = (sc.lambda2_hat / (24.0 * 3) * phi.sum()
                 * (full.beta - 1.0) ** 2)
    assert rel(full.xi - tail_only.xi, leak_term) < 1e-12


def test_leaderless_leak_term_linear_in_phi(di):
    sc = cycle_constants(4)
    ups = np.zeros(4)
    phi = np.array([0.05, 0.1, 0.08, 0.12])
    one = leaderless_bound(sc, di, phi=phi, upsilon=ups, floor_offset=2.0)
    two = leaderless_bound(sc, di, phi=2 * phi, upsilon=ups, floor_offset=2.0)
    assert rel(two.xi, 2.0 * one.xi) < 1e-12


def test_leaderless_bound_validation(di):
    sc = cycle_constants(3)
    with pytest.raises(ValueError, match="positive phi"):
        leaderless_bound(sc, di, phi=[0.1, 0.1, -0.1], upsilon=np.ones(3))
    with pytest.raises(ValueError, match="one entry per agent"):
        leaderless_bound(sc, di, phi=np.full(3, 0.1), upsilon=np.ones(4))


# --- check_containment --------------------------------------------------

def _traj(err_norms):
    k = len(err_norms)
    return Trajectory(
        times=np.linspace(0.0, float(k - 1), k),
        states=np.zeros((k, 2)),
        gains=np.ones((k, 1)),
        err_norms=np.asarray(err_norms, dtype=float),
        control_norms=np.zeros(k),
        leader_mode=True,
    )


def test_containment_settled_trajectory(di):
    b = leader_bound(two_follower_constants(), di,
                     phi=[0.1, 0.1], upsilon=[0.0, 0.1, 0.1])
    rep = check_containment(_traj([3.0, 1.0, 0.0, 0.0, 0.0]), b)
    assert rep.contained
    assert rep.observed_sq == 0.0
    assert rep.slack_ratio == float("inf")


def test_containment_violation(di):
    b = leader_bound(two_follower_constants(), di,
                     phi=[0.1, 0.1], upsilon=[0.0, 0.1, 0.1])
    big = np.sqrt(b.radius_sq) * 2.0
    rep = check_containment(_traj([0.0, 0.0, big, big, big]), b)
    assert not rep.contained
    assert rep.slack_ratio < 1.0
    assert rel(rep.observed_sq, big ** 2) < 1e-12


def test_containment_refuses_inapplicable_bound(di):
    b = leader_bound(two_follower_constants(), di,
                     phi=[0.5, 0.5], upsilon=[0.0, 0.1, 0.1])
    with pytest.raises(ValueError, match="no containment claim"):
        check_containment(_traj([0.0, 0.0]), b)

"""Bundled reference scenarios.

Double-integrator agents on two fixed topologies: a 7-vertex leader
graph (the leader feeds one follower, the six followers form a directed
ring) and small strongly connected graphs for the leaderless protocols.
The seeds are fixed so every build reproduces the same trajectories.
"""

from __future__ import annotations

import numpy as np

from .graph import DirectedGraph
from .protocol import Variant
from .scenario_io import ScenarioFile
from .sim import AgentModel, Disturbance

__all__ = [
    "SCENARIO_BUILDERS",
    "double_integrator",
    "leader_ring_graph",
    "mixed_disturbances",
    "leader_reference_file",
    "leader_clean_file",
    "triangle_clean_file",
    "ring5_robust_file",
]

REFERENCE_PHI = 0.02


def double_integrator() -> AgentModel:
    """Position/velocity chain with force input on the velocity."""
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    b = np.array([[0.0], [1.0]])
    return AgentModel(a=a, b=b)


def leader_ring_graph() -> DirectedGraph:
    """7 vertices: leader 1 feeds vertex 2; 2..7 form a directed ring.

    Every follower is reachable from the leader, so the follower block
    of the Laplacian is a nonsingular M-matrix.
    """
    edges = [(0, 1, 1.0)]
    edges += [(i, i + 1, 1.0) for i in range(1, 6)]
    edges += [(6, 1, 1.0)]
    return DirectedGraph.from_edges(7, edges)


def mixed_disturbances() -> tuple[Disturbance, ...]:
    """Per-agent suite: sinusoids, a cosine, a decaying exponential,
    and a disturbance driven by a neighbour's position."""
    return (
        Disturbance.zero(),
        Disturbance.sine(0.2, 1.0),
        Disturbance.sine(0.1, 1.0),
        Disturbance.cosine(0.2, 2.0),
        Disturbance.exp_decay(-0.3, 2.0),
        Disturbance.state_sine(-0.2, source_agent=4, source_component=0),
        Disturbance.zero(),
    )


def leader_reference_file() -> ScenarioFile:
    """Robust leader-follower run under the mixed disturbance suite."""
    graph = leader_ring_graph()
    return ScenarioFile(
        model=double_integrator(),
        graph=graph,
        variant=Variant.LEADER_ROBUST,
        phi=np.full(6, REFERENCE_PHI),
        initial_gains=None,
        gain_seed=18,
        disturbances=mixed_disturbances(),
        x0=None,
        x0_seed=17,
        step_h=1e-3,
        t_end=60.0,
    )


def leader_clean_file() -> ScenarioFile:
    """Disturbance-free non-robust run on the leader graph."""
    graph = leader_ring_graph()
    return ScenarioFile(
        model=double_integrator(),
        graph=graph,
        variant=Variant.LEADER_NONROBUST,
        phi=np.zeros(6),
        initial_gains=None,
        gain_seed=18,
        disturbances=tuple(Disturbance.zero() for _ in range(7)),
        x0=None,
        x0_seed=17,
        step_h=1e-3,
        t_end=30.0,
    )


def triangle_clean_file() -> ScenarioFile:
    """Disturbance-free leaderless run on a directed 3-cycle."""
    graph = DirectedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])
    return ScenarioFile(
        model=double_integrator(),
        graph=graph,
        variant=Variant.LEADERLESS_NONROBUST,
        phi=np.zeros(3),
        initial_gains=None,
        gain_seed=2,
        disturbances=tuple(Disturbance.zero() for _ in range(3)),
        x0=None,
        x0_seed=1,
        step_h=1e-3,
        t_end=30.0,
    )


def ring5_robust_file() -> ScenarioFile:
    """Robust leaderless run on a directed 5-ring, each agent driven by
    its own bounded sinusoid."""
    graph = DirectedGraph.from_edges(5, [(i, (i + 1) % 5, 1.0) for i in range(5)])
    dists = tuple(
        Disturbance.sine(0.15 + 0.05 * i, 1.0 + 0.4 * i, phase=0.5 * i)
        for i in range(5)
    )
    return ScenarioFile(
        model=double_integrator(),
        graph=graph,
        variant=Variant.LEADERLESS_ROBUST,
        phi=np.full(5, REFERENCE_PHI),
        initial_gains=None,
        gain_seed=2,
        disturbances=dists,
        x0=None,
        x0_seed=1,
        step_h=1e-3,
        t_end=60.0,
    )


# scenario name -> builder; the files under scenarios/ are generated
# from these and the test suite keeps them in sync
SCENARIO_BUILDERS = {
    "double_integrator_leader": leader_reference_file,
    "double_integrator_leader_clean": leader_clean_file,
    "leaderless_triangle_clean": triangle_clean_file,
    "leaderless_ring5": ring5_robust_file,
}

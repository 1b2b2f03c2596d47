"""Scenario assembly and fixed-step simulation of the closed-loop network.

The integrator is classical RK4 on the stacked vector of agent states plus
adaptive gains. The step is fixed (default 1e-3) so runs are reproducible
bit for bit; halving the step is the accuracy check, not an adaptive
controller. Divergence (non-finite state) aborts with a diagnostic instead
of returning garbage samples.
"""

import math
import numpy as np
from dataclasses import dataclass, replace
from functools import cached_property

from .graph import (DirectedGraph, laplacian, contains_spanning_tree,
                    is_strongly_connected, GraphStructureError)
from .protocol import GainDesign, ProtocolConfig, Variant

DISTURBANCE_KINDS = ("zero", "sine", "cosine", "exp_decay", "state_sine")


def _lock(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


class SimulationDivergence(RuntimeError):
    """The integration produced non-finite state.

    t : simulation time of the first bad sample
    agent : 1-based id of the first agent whose state (or gain) went
        non-finite, matching scenario-file numbering
    """

    def __init__(self, t, agent):
        self.t = float(t)
        self.agent = int(agent)
        super().__init__(
            f"state diverged (non-finite values) at t={self.t:.6g}s, "
            f"agent {self.agent}; reduce the step size or the initial "
            "disagreement"
        )


@dataclass(frozen=True)
class AgentModel:
    """Identical linear agent dynamics x' = A x + B (u + omega)."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"a must be square, got shape {a.shape}")
        if b.ndim != 2 or b.shape[0] != a.shape[0]:
            raise ValueError(
                f"b must be 2-d with {a.shape[0]} rows, got shape {b.shape}"
            )
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("model matrices must be finite")
        object.__setattr__(self, "a", _lock(a))
        object.__setattr__(self, "b", _lock(b))

    @property
    def n_states(self):
        return self.a.shape[0]

    @property
    def n_inputs(self):
        return self.b.shape[1]


@dataclass(frozen=True)
class Disturbance:
    """Matched disturbance acting on one agent's input channel.

    Kinds: "zero", "sine" (amplitude*sin(w t + phase)), "cosine"
    (amplitude*cos(w t)), "exp_decay" (amplitude*exp(-rate t)), and
    "state_sine" (amplitude*sin of one state component of another agent,
    for state-coupled disturbances; the source is addressed by 0-based
    agent and component indices).

    The scalar signal enters input channel 1 (zeros elsewhere for p > 1),
    so ||omega(t, x)|| <= bound holds by construction, where bound is
    |amplitude|.
    """

    kind: str
    amplitude: float = 0.0
    angular_frequency: float = 0.0
    phase: float = 0.0
    rate: float = 0.0
    source_agent: int = 0
    source_component: int = 0

    def __post_init__(self):
        if self.kind not in DISTURBANCE_KINDS:
            raise ValueError(
                f"unknown disturbance kind {self.kind!r}; "
                f"expected one of {DISTURBANCE_KINDS}"
            )
        for name in ("amplitude", "angular_frequency", "phase", "rate"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"disturbance {name} must be finite")
        if self.kind == "exp_decay" and self.rate < 0:
            raise ValueError("exp_decay rate must be nonnegative")
        if self.kind == "state_sine":
            if self.source_agent < 0 or self.source_component < 0:
                raise ValueError("state_sine source indices must be nonnegative")

    @classmethod
    def zero(cls):
        return cls(kind="zero")

    @classmethod
    def sine(cls, amplitude, angular_frequency, phase=0.0):
        return cls(kind="sine", amplitude=amplitude,
                   angular_frequency=angular_frequency, phase=phase)

    @classmethod
    def cosine(cls, amplitude, angular_frequency):
        return cls(kind="cosine", amplitude=amplitude,
                   angular_frequency=angular_frequency)

    @classmethod
    def exp_decay(cls, amplitude, rate):
        return cls(kind="exp_decay", amplitude=amplitude, rate=rate)

    @classmethod
    def state_sine(cls, amplitude, source_agent, source_component):
        return cls(kind="state_sine", amplitude=amplitude,
                   source_agent=source_agent,
                   source_component=source_component)

    @property
    def bound(self):
        """Declared amplitude bound on ||omega(t, x)||."""
        return 0.0 if self.kind == "zero" else abs(self.amplitude)


def _compile_signal(spec, n_states):
    """Disturbance spec -> scalar closure (t, x_flat) -> float, or None."""
    kind = spec.kind
    if kind == "zero":
        return None
    amp = spec.amplitude
    if kind == "sine":
        w, ph = spec.angular_frequency, spec.phase
        return lambda t, x: amp * math.sin(w * t + ph)
    if kind == "cosine":
        w = spec.angular_frequency
        return lambda t, x: amp * math.cos(w * t)
    if kind == "exp_decay":
        rr = spec.rate
        return lambda t, x: amp * math.exp(-rr * t)
    # state_sine: reads the full stacked state, a simulation-level privilege
    # (no single agent could implement it from local measurements).
    idx = spec.source_agent * n_states + spec.source_component
    return lambda t, x: amp * math.sin(x[idx])


def eval_disturbance(spec, t, x, n_states=None, n_inputs=1):
    """Evaluate a disturbance spec at time t and stacked state x.

    Returns the (n_inputs,) vector entering the agent's input channel.
    ``n_states`` (per-agent state dimension) is required for state_sine so
    the flat index of the source component can be formed.
    """
    x = np.asarray(x, dtype=float)
    if spec.kind == "state_sine":
        if n_states is None:
            raise ValueError("state_sine evaluation needs n_states")
        idx = spec.source_agent * n_states + spec.source_component
        if idx >= x.size:
            raise ValueError(
                f"state_sine source (agent {spec.source_agent}, component "
                f"{spec.source_component}) is outside the stacked state"
            )
    fn = _compile_signal(spec, n_states if n_states is not None else 1)
    out = np.zeros(int(n_inputs))
    if fn is not None:
        out[0] = fn(float(t), x.ravel())
    return out


def draw_initial_states(n_total, seed):
    """Default initial condition: uniform draw from [-1, 1]^n_total."""
    rng = np.random.default_rng(int(seed))
    return rng.uniform(-1.0, 1.0, int(n_total))


def draw_initial_gains(n_adaptive, seed):
    """Default initial adaptive gains: uniform draw from [1, 3]."""
    rng = np.random.default_rng(int(seed))
    return rng.uniform(1.0, 3.0, int(n_adaptive))


@dataclass(frozen=True)
class Scenario:
    """Complete, validated description of one closed-loop run.

    Construction cross-checks every dimension and the graph structure the
    selected variant needs, so anything that simulates is well-posed.
    """

    graph: DirectedGraph
    model: AgentModel
    design: GainDesign
    protocol: ProtocolConfig
    disturbances: tuple
    x0: np.ndarray
    step_h: float
    t_end: float
    record_every: int = 10

    def __post_init__(self):
        g, m, d, pc = self.graph, self.model, self.design, self.protocol
        nv = g.n_vertices
        n = m.n_states
        if d.n_states != n:
            raise ValueError(
                f"gain design is for {d.n_states} states, model has {n}"
            )
        if d.n_inputs != m.n_inputs:
            raise ValueError(
                f"gain design is for {d.n_inputs} inputs, model has {m.n_inputs}"
            )
        if pc.variant.leader_mode:
            if np.any(g.weights[0, :] != 0):
                raise GraphStructureError(
                    "leader mode requires the leader (vertex 1) to have no "
                    "incoming edges"
                )
            if not contains_spanning_tree(g, root=0):
                raise GraphStructureError(
                    "leader mode requires a directed spanning tree rooted at "
                    "the leader vertex"
                )
            n_adaptive = nv - 1
        else:
            if not is_strongly_connected(g):
                raise GraphStructureError(
                    "leaderless mode requires a strongly connected graph"
                )
            n_adaptive = nv
        if pc.n_adaptive != n_adaptive:
            raise ValueError(
                f"protocol covers {pc.n_adaptive} adaptive agents, the "
                f"{'leader' if pc.variant.leader_mode else 'leaderless'} "
                f"graph needs {n_adaptive}"
            )
        dist = tuple(self.disturbances)
        if len(dist) != nv:
            raise ValueError(
                f"need one disturbance spec per agent ({nv}), got {len(dist)}"
            )
        for i, spec in enumerate(dist):
            if not isinstance(spec, Disturbance):
                raise ValueError(f"disturbances[{i}] is not a Disturbance")
            if spec.kind == "state_sine":
                if spec.source_agent >= nv or spec.source_component >= n:
                    raise ValueError(
                        f"disturbances[{i}]: state_sine source out of range"
                    )
        object.__setattr__(self, "disturbances", dist)
        x0 = np.asarray(self.x0, dtype=float)
        if x0.shape != (nv * n,):
            raise ValueError(
                f"x0 must be a flat vector of length {nv * n}, got shape {x0.shape}"
            )
        if not np.all(np.isfinite(x0)):
            raise ValueError("x0 must be finite")
        object.__setattr__(self, "x0", _lock(x0))
        if not (self.step_h > 0 and math.isfinite(self.step_h)):
            raise ValueError("step_h must be positive and finite")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ValueError("t_end must be positive and finite")
        n_steps = int(round(self.t_end / self.step_h))
        if n_steps < 1 or abs(n_steps * self.step_h - self.t_end) > 1e-6 * self.step_h:
            raise ValueError(
                "t_end must be an integer multiple of step_h"
            )
        if self.record_every < 1 or n_steps % self.record_every != 0:
            raise ValueError(
                f"step count {n_steps} must be divisible by record_every "
                f"({self.record_every})"
            )
        object.__setattr__(self, "record_every", int(self.record_every))

    @property
    def n_agents(self):
        return self.graph.n_vertices

    @property
    def mode(self):
        return "leader" if self.protocol.variant.leader_mode else "leaderless"

    @property
    def first_adaptive(self):
        """Index of the first adaptive agent (1 in leader mode, else 0)."""
        return 1 if self.protocol.variant.leader_mode else 0

    @property
    def n_steps(self):
        return int(round(self.t_end / self.step_h))

    @cached_property
    def lap_matrix(self):
        return _lock(laplacian(self.graph))

    def upsilon(self):
        """Per-agent disturbance amplitude bounds, length n_agents."""
        return np.array([spec.bound for spec in self.disturbances])


def nonrobust_twin(s):
    """The same scenario with leakage disabled (phi = 0, non-robust variant).

    Used by the drift demonstration: identical graph, gains, disturbances
    and initial conditions, only the adaptation law loses its -phi(c - 1)
    term.
    """
    variant = (Variant.LEADER_NONROBUST if s.protocol.variant.leader_mode
               else Variant.LEADERLESS_NONROBUST)
    twin = ProtocolConfig(variant=variant,
                          phi=np.zeros_like(s.protocol.phi),
                          initial_gains=s.protocol.initial_gains)
    return replace(s, protocol=twin)


@dataclass(frozen=True)
class Trajectory:
    """Recorded samples of one simulation run.

    states : (n_samples, N*n) stacked agent states, agent-major
    gains : (n_samples, m) adaptive gains (followers in leader mode)
    err_norms : Frobenius norm of the stacked relative states
    control_norms : Frobenius norm of the stacked control inputs
    """

    times: np.ndarray
    states: np.ndarray
    gains: np.ndarray
    err_norms: np.ndarray
    control_norms: np.ndarray
    leader_mode: bool

    def __post_init__(self):
        for name in ("times", "states", "gains", "err_norms", "control_norms"):
            object.__setattr__(self, name, _lock(getattr(self, name)))

    @property
    def n_samples(self):
        return self.times.size

    @property
    def n_agents(self):
        return self.gains.shape[1] + (1 if self.leader_mode else 0)

    @property
    def n_states(self):
        return self.states.shape[1] // self.n_agents


def _deriv_factory(s):
    """Bind everything the inner RK4 loop touches to locals."""
    lap = np.array(s.lap_matrix)
    a_t = np.array(s.model.a.T)
    b_t = np.array(s.model.b.T)
    q = np.array(s.design.q)
    k_t = np.array(s.design.k.T)
    gamma = np.array(s.design.gamma)
    phi = np.array(s.protocol.phi)
    a0 = s.first_adaptive
    nv, n, p = s.n_agents, s.model.n_states, s.model.n_inputs
    signals = [(i, _compile_signal(spec, n))
               for i, spec in enumerate(s.disturbances)
               if spec.kind != "zero"]

    def deriv(t, xm, g):
        xi = lap @ xm
        quad = np.einsum("ij,jk,ik->i", xi, q, xi)
        cfull = np.zeros(nv)
        cfull[a0:] = g
        u = (cfull * (1.0 + quad) ** 3)[:, None] * (xi @ k_t)
        if signals:
            om = np.zeros((nv, p))
            xf = xm.ravel()
            for row, fn in signals:
                om[row, 0] = fn(t, xf)
            eff = u + om
        else:
            eff = u
        xdot = xm @ a_t + eff @ b_t
        xia = xi[a0:]
        gq = np.einsum("ij,jk,ik->i", xia, gamma, xia)
        gdot = -phi * (g - 1.0) + gq
        return xdot, gdot

    def observe(t, xm, g):
        xi = lap @ xm
        quad = np.einsum("ij,jk,ik->i", xi, q, xi)
        cfull = np.zeros(nv)
        cfull[a0:] = g
        u = (cfull * (1.0 + quad) ** 3)[:, None] * (xi @ k_t)
        return float(np.linalg.norm(xi[a0:])), float(np.linalg.norm(u))

    return deriv, observe


def system_derivative(t, x, gains, s):
    """Closed-loop derivative (x', gains') at time t.

    x is the (N*n,) stacked state, gains the adaptive gains of the
    scenario's adaptive agents. This is the vector field the simulator
    integrates, exposed for testing and external integrators.
    """
    x = np.asarray(x, dtype=float)
    gains = np.asarray(gains, dtype=float)
    nv, n = s.n_agents, s.model.n_states
    if x.shape != (nv * n,):
        raise ValueError(f"x must have shape ({nv * n},), got {x.shape}")
    if gains.shape != (s.protocol.n_adaptive,):
        raise ValueError(
            f"gains must have shape ({s.protocol.n_adaptive},), got {gains.shape}"
        )
    deriv, _ = _deriv_factory(s)
    xdot, gdot = deriv(float(t), x.reshape(nv, n), gains)
    return xdot.ravel(), gdot


def simulate(s):
    """Integrate a scenario with fixed-step RK4 and record the trajectory.

    Records every ``record_every`` steps including the initial state and
    the final time. Raises SimulationDivergence as soon as a recorded
    sample would contain non-finite values.
    """
    deriv, observe = _deriv_factory(s)
    nv, n = s.n_agents, s.model.n_states
    h = s.step_h
    n_steps = s.n_steps
    rec = s.record_every
    n_samples = n_steps // rec + 1

    times = np.empty(n_samples)
    states = np.empty((n_samples, nv * n))
    gains_rec = np.empty((n_samples, s.protocol.n_adaptive))
    errs = np.empty(n_samples)
    ctrls = np.empty(n_samples)

    xm = s.x0.reshape(nv, n).copy()
    g = s.protocol.initial_gains.copy()

    def record(idx, t):
        if not (np.all(np.isfinite(xm)) and np.all(np.isfinite(g))):
            bad = np.nonzero(~np.isfinite(xm).all(axis=1))[0]
            if bad.size:
                agent = int(bad[0]) + 1
            else:
                agent = int(np.nonzero(~np.isfinite(g))[0][0]) + s.first_adaptive + 1
            raise SimulationDivergence(t=t, agent=agent)
        times[idx] = t
        states[idx] = xm.ravel()
        gains_rec[idx] = g
        errs[idx], ctrls[idx] = observe(t, xm, g)

    half, sixth = h / 2.0, h / 6.0
    with np.errstate(over="ignore", invalid="ignore"):
        record(0, 0.0)
        sample = 1
        for k in range(n_steps):
            t = k * h
            k1x, k1g = deriv(t, xm, g)
            k2x, k2g = deriv(t + half, xm + half * k1x, g + half * k1g)
            k3x, k3g = deriv(t + half, xm + half * k2x, g + half * k2g)
            k4x, k4g = deriv(t + h, xm + h * k3x, g + h * k3g)
            xm = xm + sixth * (k1x + 2.0 * (k2x + k3x) + k4x)
            g = g + sixth * (k1g + 2.0 * (k2g + k3g) + k4g)
            if (k + 1) % rec == 0:
                record(sample, (k + 1) * h)
                sample += 1

    return Trajectory(times=times, states=states, gains=gains_rec,
                      err_norms=errs, control_norms=ctrls,
                      leader_mode=s.protocol.variant.leader_mode)


def tail_sup_norm(traj, window_fraction=0.5):
    """Supremum of the recorded error norm over the trailing window.

    window_fraction is the fraction of the full horizon the window covers,
    in (0, 1]; 0.5 means the second half of the run.
    """
    if not (0.0 < window_fraction <= 1.0):
        raise ValueError("window_fraction must be in (0, 1]")
    t = traj.times
    t_min = t[-1] - window_fraction * (t[-1] - t[0])
    mask = t >= t_min - 1e-12
    return float(traj.err_norms[mask].max())


def write_trajectory_csv(traj, path):
    """Write a trajectory as CSV with 9 significant digits per value.

    Columns: t, per-agent state components x_<agent>_<component>, adaptive
    gains (c_2..c_N in leader mode, d_1..d_N leaderless), err_norm,
    ctrl_norm. Agent and component ids in the header are 1-based.
    """
    nv, n = traj.n_agents, traj.n_states
    cols = ["t"]
    cols += [f"x_{i + 1}_{j + 1}" for i in range(nv) for j in range(n)]
    prefix = "c" if traj.leader_mode else "d"
    first = 2 if traj.leader_mode else 1
    cols += [f"{prefix}_{i}" for i in range(first, nv + 1)]
    cols += ["err_norm", "ctrl_norm"]

    lines = [",".join(cols)]
    for idx in range(traj.n_samples):
        row = [traj.times[idx], *traj.states[idx], *traj.gains[idx],
               traj.err_norms[idx], traj.control_norms[idx]]
        lines.append(",".join(f"{v:.9g}" for v in row))
    data = "\n".join(lines) + "\n"
    with open(path, "w", newline="") as fh:
        fh.write(data)


def read_trajectory_csv(path):
    """Parse a CSV written by write_trajectory_csv back into a Trajectory."""
    import csv

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [list(map(float, row)) for row in reader if row]
    if not header or header[0] != "t" or header[-2:] != ["err_norm", "ctrl_norm"]:
        raise ValueError(f"{path}: not a trajectory CSV (unexpected header)")
    state_cols = [c for c in header if c.startswith("x_")]
    gain_cols = [c for c in header if c.startswith(("c_", "d_"))]
    if not state_cols or not gain_cols:
        raise ValueError(f"{path}: header is missing state or gain columns")
    if len(header) != 3 + len(state_cols) + len(gain_cols):
        raise ValueError(f"{path}: header has unrecognized columns")
    leader_mode = gain_cols[0].startswith("c_")
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ValueError(f"{path}: row width does not match header")
    ns = len(state_cols)
    return Trajectory(
        times=data[:, 0],
        states=data[:, 1:1 + ns],
        gains=data[:, 1 + ns:1 + ns + len(gain_cols)],
        err_norms=data[:, -2],
        control_norms=data[:, -1],
        leader_mode=leader_mode,
    )

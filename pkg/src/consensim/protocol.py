"""Adaptive consensus protocol: Riccati gain design and the per-agent
control and gain-adaptation laws.

Each adaptive agent i runs

    u_i = c_i * rho(xi_i^T Q xi_i) * K xi_i
    c_i' = -phi_i (c_i - 1) + xi_i^T Gamma xi_i

on its local relative state xi_i = sum_j w_ij (x_i - x_j), with K = -B^T Q
from the Riccati design, Gamma = K^T K, and rho(s) = (1 + s)^3. phi_i > 0
gives the leakage-damped (robust) variant; phi_i = 0 recovers the pure
integral adaptation, whose gains can drift under persistent disturbances.
"""

import enum
import numpy as np
from dataclasses import dataclass

from .numerics import solve_are, sym_eig


class Variant(enum.Enum):
    """Protocol variant: coordination mode x adaptation law."""

    LEADER_ROBUST = "leader_robust"
    LEADER_NONROBUST = "leader_nonrobust"
    LEADERLESS_ROBUST = "leaderless_robust"
    LEADERLESS_NONROBUST = "leaderless_nonrobust"

    @property
    def leader_mode(self):
        return self in (Variant.LEADER_ROBUST, Variant.LEADER_NONROBUST)

    @property
    def robust(self):
        return self in (Variant.LEADER_ROBUST, Variant.LEADERLESS_ROBUST)


def _lock(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GainDesign:
    """Riccati-based gain set shared by every adaptive agent.

    q : (n, n) symmetric positive definite Riccati solution
    k : (p, n) feedback gain, -B^T Q
    gamma : (n, n) adaptation weight, K^T K = Q B B^T Q
    tau : 1 / lambda_max(Q), the leakage-rate ceiling the residual-set
        bounds are conditioned on
    """

    q: np.ndarray
    k: np.ndarray
    gamma: np.ndarray
    tau: float

    def __post_init__(self):
        for name in ("q", "k", "gamma"):
            object.__setattr__(self, name, _lock(getattr(self, name)))
        q, k, gamma = self.q, self.k, self.gamma
        n = q.shape[0]
        if q.shape != (n, n) or gamma.shape != (n, n):
            raise ValueError("q and gamma must be square with matching size")
        if k.ndim != 2 or k.shape[1] != n:
            raise ValueError(f"k must have {n} columns, got shape {k.shape}")
        if np.linalg.norm(q - q.T) > 1e-10 * np.linalg.norm(q):
            raise ValueError("q must be symmetric")
        if self.tau <= 0:
            raise ValueError("tau must be positive")

    @property
    def n_states(self):
        return self.q.shape[0]

    @property
    def n_inputs(self):
        return self.k.shape[0]


def design_gains(a, b, tol=1e-10):
    """Design (Q, K, Gamma, tau) for the agent model (A, B).

    Solves A^T Q + Q A + I - Q B B^T Q = 0 and derives K = -B^T Q,
    Gamma = K^T K and tau = 1 / lambda_max(Q).
    """
    sol = solve_are(a, b, tol=tol)
    q = sol.q
    b = np.asarray(b, dtype=float)
    k = -(b.T @ q)
    gamma = k.T @ k
    tau = 1.0 / float(sym_eig(q)[0][-1])
    return GainDesign(q=q, k=k, gamma=gamma, tau=tau)


def rho(s):
    """Cubic gain boost (1 + s)^3 on the nonnegative quadratic form s.

    Strictly increasing with rho(0) = 1, so the boost never cuts the
    designed gain below its Riccati baseline.
    """
    s = float(s)
    if s < 0:
        raise ValueError(f"rho needs a nonnegative argument, got {s}")
    return (1.0 + s) ** 3


def relative_state(i, x, g):
    """Local disagreement xi_i = sum_j w_ij (x_i - x_j).

    Parameters
    ----------
    i : agent index, 0-based
    x : (N*n,) stacked state, agent-major
    g : DirectedGraph
    """
    w = g.weights
    nv = w.shape[0]
    if not (0 <= i < nv):
        raise ValueError(f"agent index {i} out of range for {nv} agents")
    x = np.asarray(x, dtype=float)
    if x.size % nv != 0:
        raise ValueError(
            f"stacked state length {x.size} is not a multiple of {nv} agents"
        )
    states = x.reshape(nv, -1)
    return w[i].sum() * states[i] - w[i] @ states


def control(xi_i, gain_i, d):
    """Control input u_i = gain_i * rho(xi^T Q xi) * K xi."""
    xi_i = np.asarray(xi_i, dtype=float)
    s = float(xi_i @ d.q @ xi_i)
    return float(gain_i) * rho(s) * (d.k @ xi_i)


def gain_rate(xi_i, gain_i, phi_i, d):
    """Adaptation rate c_i' = -phi_i (gain_i - 1) + xi^T Gamma xi."""
    if phi_i < 0:
        raise ValueError(f"phi must be nonnegative, got {phi_i}")
    if gain_i < 1.0 - 1e-9:
        raise ValueError(f"adaptive gain must stay at or above 1, got {gain_i}")
    xi_i = np.asarray(xi_i, dtype=float)
    return float(-phi_i * (gain_i - 1.0) + xi_i @ d.gamma @ xi_i)


@dataclass(frozen=True)
class ProtocolConfig:
    """Variant plus per-agent adaptation parameters.

    phi : leakage rates for the adaptive agents (followers in leader mode,
        everyone otherwise). Forced to zero for non-robust variants;
        robust variants require every entry positive.
    initial_gains : starting adaptive gains, all >= 1 (the adaptation law
        then keeps them >= 1 for all time).
    """

    variant: Variant
    phi: np.ndarray
    initial_gains: np.ndarray

    def __post_init__(self):
        if not isinstance(self.variant, Variant):
            raise ValueError(f"unknown protocol variant: {self.variant!r}")
        phi = np.atleast_1d(np.asarray(self.phi, dtype=float))
        gains = np.atleast_1d(np.asarray(self.initial_gains, dtype=float))
        if phi.shape != gains.shape:
            raise ValueError(
                f"phi has {phi.size} entries but initial_gains has {gains.size}"
            )
        if not np.all(np.isfinite(phi)) or not np.all(np.isfinite(gains)):
            raise ValueError("phi and initial_gains must be finite")
        if self.variant.robust:
            if np.any(phi <= 0):
                raise ValueError("robust variant requires positive phi")
        else:
            phi = np.zeros_like(phi)
        if np.any(phi < 0):
            raise ValueError("phi must be nonnegative")
        if np.any(gains < 1.0):
            raise ValueError("initial gains must be at least 1")
        object.__setattr__(self, "phi", _lock(phi))
        object.__setattr__(self, "initial_gains", _lock(gains))

    @property
    def n_adaptive(self):
        return self.phi.size

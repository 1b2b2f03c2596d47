"""Closed-form residual-set bounds for the robust adaptive protocols.

Both bounds have the same shape: a constant Pi (leader case) or Xi
(leaderless case) collecting the leakage penalty and the disturbance
energy, divided by (tau - delta) * lambda_min(Q) * min weight, where tau =
1 / lambda_max(Q) caps how much leakage the analysis tolerates. The bound
is only applicable when the smallest leakage rate stays below tau; it is
deliberately conservative, so large slack against observed trajectories is
the expected outcome, not an accident.
"""

import numpy as np
from dataclasses import dataclass

from .numerics import sym_eig, sigma_max
from .sim import tail_sup_norm


def _check_rates(phi, n_adaptive, what):
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    if phi.size != n_adaptive:
        raise ValueError(
            f"phi must have one entry per adaptive agent ({n_adaptive}), "
            f"got {phi.size}"
        )
    if not np.all(np.isfinite(phi)) or np.any(phi <= 0):
        raise ValueError(f"{what} requires positive phi for every adaptive agent")
    return phi


def _check_upsilon(upsilon, n_agents):
    upsilon = np.atleast_1d(np.asarray(upsilon, dtype=float))
    if upsilon.size != n_agents:
        raise ValueError(
            f"upsilon must have one entry per agent ({n_agents}), got {upsilon.size}"
        )
    if not np.all(np.isfinite(upsilon)) or np.any(upsilon < 0):
        raise ValueError("disturbance bounds must be nonnegative and finite")
    return upsilon


def omega_tilde_bound(upsilon):
    """Norm bound on the leader-relative disturbance stack.

    Each follower sees its own disturbance plus the leader's, so the
    stacked deviation is bounded by sqrt(sum_i (upsilon_i + upsilon_1)^2)
    over followers i.
    """
    upsilon = np.atleast_1d(np.asarray(upsilon, dtype=float))
    if upsilon.size < 2:
        raise ValueError("need the leader bound plus at least one follower")
    if not np.all(np.isfinite(upsilon)) or np.any(upsilon < 0):
        raise ValueError("disturbance bounds must be nonnegative and finite")
    return float(np.sqrt(((upsilon[1:] + upsilon[0]) ** 2).sum()))


@dataclass(frozen=True)
class LeaderBound:
    """Residual-set description for the leader-follower robust protocol.

    radius_sq bounds the tail supremum of ||xi||^2; None when the bound is
    inapplicable (delta >= tau).
    """

    delta: float
    tau: float
    alpha: float
    pi: float
    radius_sq: float | None
    applicable: bool


def leader_bound(lc, d, phi, upsilon):
    """Evaluate the leader-case residual bound from graph constants.

    Parameters
    ----------
    lc : LeaderConstants
    d : GainDesign
    phi : positive leakage rates, one per follower
    upsilon : per-agent disturbance amplitude bounds, leader first
        (length = followers + 1)
    """
    m = lc.q.size
    phi = _check_rates(phi, m, "leader bound")
    upsilon = _check_upsilon(upsilon, m + 1)

    lam = lc.lambda_hat0
    q = lc.q
    alpha = float(72.0 / lam ** 2 * np.max(q ** 2)
                  + np.max(2.0 * q ** 3 / lam ** 3))
    sig = sigma_max(lc.g @ lc.l1)
    dist_energy = float(((upsilon[1:] + upsilon[0]) ** 2).sum())
    pi = float(lam / 24.0 * phi.sum() * (alpha - 1.0) ** 2
               + 12.0 / lam * sig ** 2 * dist_energy)

    delta = float(phi.min())
    tau = d.tau
    applicable = delta < tau
    radius_sq = None
    if applicable:
        lam_min_q = float(sym_eig(d.q)[0][0])
        radius_sq = float(2.0 * pi / ((tau - delta) * lam_min_q * q.min()))
    return LeaderBound(delta=delta, tau=tau, alpha=alpha, pi=pi,
                       radius_sq=radius_sq, applicable=applicable)


@dataclass(frozen=True)
class LeaderlessBound:
    """Residual-set description for the leaderless robust protocol.

    radius_sq bounds the tail supremum of ||zeta||^2; None when
    inapplicable (epsilon >= tau).
    """

    epsilon: float
    tau: float
    beta: float
    xi: float
    radius_sq: float | None
    applicable: bool


def leaderless_bound(sc, d, phi, upsilon, floor_offset=None):
    """Evaluate the leaderless residual bound from strong-graph constants.

    Parameters
    ----------
    sc : StrongConstants
    d : GainDesign
    phi : positive leakage rates, one per agent
    upsilon : per-agent disturbance amplitude bounds
    floor_offset : optional override of the gain-floor offset whose square
        scales the leakage term of Xi. Defaults to beta - 1, the
        self-consistent choice; callers wanting a different published form
        can pass their own offset.
    """
    nv = sc.r.size
    phi = _check_rates(phi, nv, "leaderless bound")
    upsilon = _check_upsilon(upsilon, nv)

    lam2 = sc.lambda2_hat
    r = sc.r
    beta = float(72.0 * nv ** 2 / lam2 * np.max(r ** 2)
                 + np.max(2.0 * r ** 3 * nv ** 3 / lam2 ** 3))
    offset = beta - 1.0 if floor_offset is None else float(floor_offset)
    sig = sigma_max(sc.r_mat @ sc.laplacian)
    xi = float(lam2 / (24.0 * nv) * phi.sum() * offset ** 2
               + 12.0 * nv / lam2 * sig ** 2 * (upsilon ** 2).sum())

    epsilon = float(phi.min())
    tau = d.tau
    applicable = epsilon < tau
    radius_sq = None
    if applicable:
        lam_min_q = float(sym_eig(d.q)[0][0])
        radius_sq = float(2.0 * xi / ((tau - epsilon) * lam_min_q * r.min()))
    return LeaderlessBound(epsilon=epsilon, tau=tau, beta=beta, xi=xi,
                           radius_sq=radius_sq, applicable=applicable)


@dataclass(frozen=True)
class ContainmentReport:
    """Observed tail behavior of a trajectory against a theoretical bound."""

    observed_sq: float
    bound_sq: float
    contained: bool
    slack_ratio: float


def check_containment(traj, bound, window_fraction=0.5):
    """Compare a trajectory's tail sup ||error||^2 against a residual bound.

    Refuses to evaluate inapplicable bounds (minimum leakage rate at or
    above tau) rather than reporting a vacuous verdict.
    """
    if not bound.applicable or bound.radius_sq is None:
        raise ValueError(
            "bound inapplicable (min phi >= tau = 1/lambda_max(Q)); "
            "no containment claim is available"
        )
    observed_sq = tail_sup_norm(traj, window_fraction) ** 2
    bound_sq = float(bound.radius_sq)
    contained = observed_sq <= bound_sq
    slack = float("inf")
    if observed_sq > 0:
        slack = bound_sq / observed_sq
    return ContainmentReport(observed_sq=float(observed_sq),
                             bound_sq=bound_sq,
                             contained=bool(contained),
                             slack_ratio=float(slack))

"""Dense linear-algebra kernels used across the package.

Everything here targets small matrices (state dimensions and agent counts in
the single or low double digits), so dense O(n^3) methods and the Kronecker
form of the Lyapunov equation are the right tools. Solvers check their own
results and raise instead of returning garbage.
"""

import numpy as np
from dataclasses import dataclass

from scipy.linalg import lu_factor as _lu_factor, lu_solve as _lu_solve

# Relative pivot threshold below which an LU factorization is declared singular.
PIVOT_RTOL = 1e-12

MAX_FLOW_STEPS = 10_000
MAX_NEWTON_STEPS = 50


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance."""


def _as_square(m, name):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def lu_solve(m, rhs):
    """Solve ``m @ x = rhs`` by LU factorization with partial pivoting.

    Rejects matrices that are singular to working precision (smallest pivot
    below ``PIVOT_RTOL`` relative to the largest) and verifies the residual
    of the computed solution.

    Parameters
    ----------
    m : (n, n) array_like
    rhs : (n,) or (n, k) array_like

    Returns
    -------
    x : ndarray, same trailing shape as rhs
    """
    m = _as_square(m, "m")
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != m.shape[0]:
        raise ValueError(
            f"rhs length {rhs.shape[0]} does not match matrix size {m.shape[0]}"
        )
    lu, piv = _lu_factor(m)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= PIVOT_RTOL * pivots.max():
        raise np.linalg.LinAlgError("matrix is singular to working precision")
    x = _lu_solve((lu, piv), rhs)
    # One step of iterative refinement, then a backward-stability guard:
    # anything worse than roundoff at the problem's own scale means the
    # factorization cannot be trusted.
    x = x + _lu_solve((lu, piv), rhs - m @ x)
    resid = np.linalg.norm(m @ x - rhs)
    scale = np.linalg.norm(m) * np.linalg.norm(x) + np.linalg.norm(rhs)
    if resid > 1e-9 * scale:
        raise np.linalg.LinAlgError(
            f"LU solve residual {resid:.3e} exceeds tolerance; "
            "matrix is too ill-conditioned"
        )
    return x


def sym_eig(s):
    """Eigendecomposition of a symmetric matrix.

    Returns ``(w, v)`` with eigenvalues ``w`` ascending and orthonormal
    eigenvectors in the columns of ``v``. The input must be symmetric to
    within 1e-10 relative to its Frobenius norm; it is symmetrized before
    factorization so the result is exact for the symmetric part.
    """
    s = _as_square(s, "s")
    if np.linalg.norm(s - s.T) > 1e-10 * np.linalg.norm(s):
        raise ValueError("matrix is not symmetric")
    return np.linalg.eigh((s + s.T) / 2.0)


def sigma_max(m):
    """Largest singular value of ``m``, via the Gram matrix.

    Computed as sqrt(lambda_max(M^T M)) on the smaller Gram side; negative
    eigenvalues from roundoff are clipped at zero.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"m must be 2-d, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("m contains non-finite entries")
    if m.shape[0] < m.shape[1]:
        m = m.T
    gram = m.T @ m
    w = np.linalg.eigvalsh((gram + gram.T) / 2.0)
    return float(np.sqrt(max(w[-1], 0.0)))


def lyapunov_solve(a, c):
    """Solve the continuous Lyapunov equation ``A^T X + X A + C = 0``.

    Uses the Kronecker identity vec(A^T X + X A) = (I (x) A^T + A^T (x) I)
    vec(X) and a dense LU solve of the n^2 x n^2 system. A singular system
    means A has eigenvalue pairs summing to zero, which rules out a unique
    solution (in particular A is not Hurwitz).

    Parameters
    ----------
    a : (n, n) array_like
    c : (n, n) array_like, symmetric

    Returns
    -------
    x : (n, n) ndarray, symmetric, with residual ||A^T X + X A + C||_F
        at most 1e-9 relative to ||C||_F (absolute when C = 0).
    """
    a = _as_square(a, "a")
    c = _as_square(c, "c")
    if a.shape != c.shape:
        raise ValueError(f"shape mismatch: a is {a.shape}, c is {c.shape}")
    nc = np.linalg.norm(c)
    if np.linalg.norm(c - c.T) > 1e-10 * nc:
        raise ValueError("c must be symmetric")
    n = a.shape[0]
    eye = np.eye(n)
    kron = np.kron(eye, a.T) + np.kron(a.T, eye)
    try:
        vec = lu_solve(kron, -c.ravel(order="F"))
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "Lyapunov system is singular: a has eigenvalues summing to zero "
            "in pairs (not Hurwitz)"
        ) from exc
    x = vec.reshape((n, n), order="F")
    x = (x + x.T) / 2.0
    resid = np.linalg.norm(a.T @ x + x @ a + c)
    if resid > 1e-9 * max(nc, 1.0):
        raise np.linalg.LinAlgError(
            f"Lyapunov residual {resid:.3e} exceeds tolerance"
        )
    return x


def is_hurwitz(a):
    """Whether all eigenvalues of ``a`` have negative real part.

    Decided without a nonsymmetric eigensolve: A is Hurwitz iff
    A^T X + X A + I = 0 has a symmetric positive definite solution.
    """
    a = _as_square(a, "a")
    try:
        x = lyapunov_solve(a, np.eye(a.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return bool(np.linalg.eigvalsh(x)[0] > 0.0)


@dataclass(frozen=True)
class AreSolution:
    """Result of :func:`solve_are`.

    q : stabilizing solution, symmetric positive definite
    residual_norm : Frobenius norm of A^T Q + Q A + I - Q B B^T Q
    iterations : total iteration count (flow steps plus Newton steps)
    """

    q: np.ndarray
    residual_norm: float
    iterations: int


def _are_residual(a, bbt, eye, q):
    return a.T @ q + q @ a + eye - q @ bbt @ q


def solve_are(a, b, tol=1e-10):
    """Stabilizing solution of ``A^T Q + Q A + I - Q B B^T Q = 0``.

    Two phases. A damped forward-Euler integration of the matrix flow
    dQ/ds = A^T Q + Q A + I - Q B B^T Q from Q = I pulls the iterate into
    the stabilizing basin (step size halved whenever the residual grows,
    grown again after accepted steps). Newton refinement then polishes to
    full precision; each Newton step solves one Lyapunov equation on the
    current closed loop A - B B^T Q and converges quadratically near the
    solution.

    Parameters
    ----------
    a : (n, n) array_like
    b : (n, p) array_like
    tol : float
        Target Frobenius norm of the equation residual.

    Returns
    -------
    AreSolution

    Raises
    ------
    ConvergenceError
        If the iteration does not reach ``tol``; for a stabilizable pair
        this does not happen, so failure indicates (A, B) is likely not
        stabilizable.
    """
    a = _as_square(a, "a")
    b = np.asarray(b, dtype=float)
    if b.ndim != 2 or b.shape[0] != a.shape[0]:
        raise ValueError(
            f"b must be 2-d with {a.shape[0]} rows, got shape {b.shape}"
        )
    if not np.all(np.isfinite(b)):
        raise ValueError("b contains non-finite entries")
    if tol <= 0:
        raise ValueError("tol must be positive")

    n = a.shape[0]
    eye = np.eye(n)
    bbt = b @ b.T
    norm_a = np.linalg.norm(a)

    # Phase 1: damped forward-Euler integration of the Riccati flow from
    # Q = I. The step is scaled by the local Jacobian size (the flow
    # linearization contracts at closed-loop eigenvalue-sum rates, bounded
    # by ||A|| + ||B B^T Q||); the damping factor backs off whenever a step
    # clearly destabilizes the residual. The residual is allowed to grow
    # moderately, the flow is not a descent method for it.
    q = eye.copy()
    resid = _are_residual(a, bbt, eye, q)
    rnorm = np.linalg.norm(resid)
    damping = 0.5
    flow_steps = 0
    warm_target = np.sqrt(tol)
    while rnorm > warm_target and flow_steps < MAX_FLOW_STEPS:
        eta = damping / (1.0 + norm_a + np.linalg.norm(bbt @ q))
        q_try = q + eta * resid
        q_try = (q_try + q_try.T) / 2.0
        r_try = _are_residual(a, bbt, eye, q_try)
        rn_try = np.linalg.norm(r_try)
        if np.isfinite(rn_try) and rn_try <= 2.0 * rnorm:
            q, resid, rnorm = q_try, r_try, rn_try
            damping = min(damping * 1.05, 0.5)
        else:
            damping *= 0.5
            if damping < 1e-14:
                break
        flow_steps += 1

    # Phase 2: Newton refinement. With A_k = A - B B^T Q_k, the next iterate
    # solves A_k^T Q + Q A_k + (I + Q_k B B^T Q_k) = 0. Quadratic near the
    # solution; stops early once the residual hits its rounding floor,
    # keeping the best iterate seen.
    newton_steps = 0
    stall = 0
    best_q, best_rnorm = q, rnorm
    while best_rnorm > tol and newton_steps < MAX_NEWTON_STEPS:
        a_cl = a - bbt @ q
        try:
            q_next = lyapunov_solve(a_cl, eye + q @ bbt @ q)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(
                "Riccati Newton step hit a singular Lyapunov system; "
                "(a, b) is likely not stabilizable"
            ) from exc
        rn_next = np.linalg.norm(_are_residual(a, bbt, eye, q_next))
        if not np.isfinite(rn_next):
            raise ConvergenceError(
                "Riccati Newton iteration diverged; (a, b) is likely not "
                "stabilizable"
            )
        if rn_next < best_rnorm:
            best_q, best_rnorm = q_next, rn_next
            stall = 0
        else:
            stall += 1
            if stall >= 3:
                break
        q = q_next
        newton_steps += 1

    q, rnorm = best_q, best_rnorm
    if rnorm > tol:
        raise ConvergenceError(
            f"Riccati solve stalled at residual {rnorm:.3e} (target {tol:.1e}); "
            "(a, b) is either not stabilizable or too badly scaled for the "
            "requested tolerance"
        )

    if np.linalg.eigvalsh(q)[0] <= 0.0:
        raise ConvergenceError(
            "Riccati iteration converged to a non positive definite solution; "
            "(a, b) is likely not stabilizable"
        )
    if not is_hurwitz(a - bbt @ q):
        raise ConvergenceError(
            "Riccati solution does not stabilize the closed loop; "
            "(a, b) is likely not stabilizable"
        )
    return AreSolution(q=q, residual_norm=float(rnorm),
                       iterations=flow_steps + newton_steps)

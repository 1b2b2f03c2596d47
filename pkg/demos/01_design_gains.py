"""
Gain design for a double integrator
===================================

Solve the control Riccati equation A'Q + QA + I - QBB'Q = 0 for the
double-integrator agent, then read off the feedback gain K = -B'Q, the
adaptation weight Gamma = K'K, and the leakage ceiling tau = 1/lmax(Q).
"""

import numpy as np

from consensim import design_gains, is_hurwitz, solve_are

a = np.array([[0.0, 1.0], [0.0, 0.0]])
b = np.array([[0.0], [1.0]])

# the raw solver reports its residual and iteration count
sol = solve_are(a, b)
print("Q =")
print(sol.q)
print(f"residual = {sol.residual_norm:.3e} after {sol.iterations} iterations")

# for this model Q has the closed form [[sqrt(3), 1], [1, sqrt(3)]]
exact = np.array([[np.sqrt(3.0), 1.0], [1.0, np.sqrt(3.0)]])
print(f"max deviation from closed form: {np.abs(sol.q - exact).max():.3e}")

design = design_gains(a, b)
print("K =", design.k)
print("Gamma =")
print(design.gamma)
print(f"tau = {design.tau:.6f}  (leakage rates phi_i must stay below this)")

# the designed loop a + b k is Hurwitz, which is what the protocol needs
print("closed loop Hurwitz:", is_hurwitz(a + b @ design.k))

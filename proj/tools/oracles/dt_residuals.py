#!/usr/bin/env python3
"""Independent least-squares route to the design-residual coefficients.

The residual definition is eta_i = Ytilde_i - pi_i * d_i' phi with
phi = Delta^{-1} sum_i (1 - pi_i) d_i Ytilde_i,
Delta = sum_i pi_i (1 - pi_i) d_i d_i'.

Those normal equations are exactly weighted least squares of the response
r_i = Ytilde_i / pi_i on predictors d_i with weights w_i = pi_i (1 - pi_i):
  sum w_i d_i d_i' phi = sum w_i d_i r_i = sum (1 - pi_i) d_i Ytilde_i.
So an lstsq fit on sqrt(w)-scaled rows must reproduce phi; we print both
routes and the eta vector for a frozen 10-cluster instance.
"""
import numpy as np

counts = np.array([12, 7, 23, 9, 15, 31, 5, 18, 11, 26], dtype=float)
m = 4
pi = m * counts / counts.sum()
V = np.array([3, 0, 7, 1, 2, 9, 0, 4, 1, 6], dtype=float)
cx = np.array([0.5, 1.5, 2.5, 3.5, 0.5, 1.5, 2.5, 3.5, 0.5, 1.5])
ytil = np.array([1.2, 0.4, 3.1, 0.9, 1.4, 4.2, 0.2, 2.0, 1.1, 3.3])

D = np.column_stack([pi, V, cx])

# route 1: normal equations as written
delta = (D * (pi * (1 - pi))[:, None]).T @ D
rhs = ((1 - pi) * ytil) @ D
phi1 = np.linalg.solve(delta, rhs)

# route 2: weighted least squares
w = np.sqrt(pi * (1 - pi))
phi2, *_ = np.linalg.lstsq(D * w[:, None], w * (ytil / pi), rcond=None)

eta = ytil - pi * (D @ phi1)

np.set_printoptions(precision=16, suppress=False)
print("pi  =", repr(pi))
print("phi (normal eq) =", repr(phi1))
print("phi (wls lstsq) =", repr(phi2))
print("max |phi1-phi2| =", np.abs(phi1 - phi2).max())
print("eta =", repr(eta))
print("check: sum_i (1-pi_i) eta_i d_i = 0 ->", repr(((1 - pi) * eta) @ D))

#!/usr/bin/env python3
"""Closed-form anticipated variance for a 3-cluster, 1-person-per-cluster
instance with exchangeable first-stage joints, used as an exact unit-test
value.

Clusters at x = 0, 1, 2 (one person each, persons at the cluster centroid),
m = 2, so pi_i = 2/3 and exchangeability gives pi_il = m(m-1)/(M(M-1)) = 1/3.
Mean model: constant mu (x = 1, beta = mu); power covariance rho(d) = 0.5^d,
sigma_u^2 = 1, n_bar = 1.

Terms per cluster i:
  eta_i          = 0 (FPPS d = pi, all clusters identical -> perfect fit)
  srswor term    = 0 (N_i = n = 1, no second-stage variance)
  unit variance  = N_i^2 sigma^2 / n = 1
  within corr    = 0 (single person)
  cross terms    = sum_{l != i} (pi_il / pi_l) sigma^2 rho_il
F = sum_i sigma_i'^2 with the same structure at pi = 1 (the census term):
  AV = sum_i sigma_i^2 / pi_i - F
The arithmetic below evaluates the generic expressions numerically.
"""
import numpy as np

M, m = 3, 2
pi = np.full(M, m / M)
pij = np.full((M, M), m * (m - 1) / (M * (M - 1)))
np.fill_diagonal(pij, pi)
pos = np.array([0.0, 1.0, 2.0])
rho = 0.5 ** np.abs(pos[:, None] - pos[None, :])
sigma2 = 1.0

# sigma_i^2: unit variance term + cross-cluster correlation term
unit = np.ones(M) * sigma2
cross = np.array([
    sum((pij[i, l] / pi[l]) * sigma2 * rho[i, l] for l in range(M) if l != i)
    for i in range(M)
])
sig = unit + cross

# F: same expression with all inclusion weights "at census" (pi_il -> pi_i pi_l
# cancels inside F per its definition: F = sum_i sigma_F,i^2 where the cross
# factor is sigma^2 rho_il without the joint ratio)
Fi = unit + np.array([
    sum(sigma2 * rho[i, l] for l in range(M) if l != i) for i in range(M)
])

av = (sig / pi).sum() - Fi.sum()
print("sigma_i^2 =", sig)
print("F_i       =", Fi)
print("AV        =", av)

# sanity: direct simplification
# AV = sum (1/pi - 1) * 1 + sum_i sum_{l!=i} ((pij/(pi_i pi_l)) - 1) rho_il
direct = ((1 / pi - 1) * sigma2).sum() + sum(
    (pij[i, l] / (pi[i] * pi[l]) - 1.0) * sigma2 * rho[i, l]
    for i in range(M) for l in range(M) if l != i
)
print("direct    =", direct)

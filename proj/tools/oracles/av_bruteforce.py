#!/usr/bin/env python3
"""Brute-force check of the anticipated-variance assembly on a 6-cluster
instance where the first-stage joint probabilities are known exactly.

Equal cluster sizes (6 persons each) give PPS probabilities pi_i = m/M = 1/2,
and any exchangeable fixed-size design is then uniform over the C(6,3) = 20
subsets, so pi_il = m(m-1)/(M(M-1)) = 1/5 exactly. The population is generated
from the working model y = x'beta + u, u ~ N(0, sigma_u^2 R) with an isotropic
Gaussian correlogram; the second stage is SRSWOR of n_bar = 2 per cluster.

We compare the closed-form assembly (with the exact small-sample factors
M/(M-H) and N(n_s-1)/(n_s(N-1))) against the empirical E_P E_M (Yhat - Y)^2
over fresh (model, sample) replicate pairs.
"""
import itertools
import numpy as np

rng = np.random.default_rng(91)

M, m, n_bar = 6, 3, 2
centroids = np.array([(0, 0), (3, 0), (6, 1), (1, 3), (4, 3), (7, 4)], float)
jitter = np.array([(-0.5, -0.25), (0, -0.25), (0.5, -0.25),
                   (-0.5, 0.25), (0, 0.25), (0.5, 0.25)])
pos = np.vstack([c + jitter for c in centroids])          # 36 x 2
cluster_of = np.repeat(np.arange(M), 6)
N_i = 6

beta = np.array([2.0, 0.35])
X = np.column_stack([np.ones(36), pos.sum(axis=1)])       # x = (1, px+py)
sigma_u2 = 1.5
alpha = 2.5


def corr(d):
    return np.where(d == 0.0, 1.0, np.exp(-3.0 * (d / alpha) ** 2))


D = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=2)
R = corr(D)
L = np.linalg.cholesky(sigma_u2 * R)
mu = X @ beta

pi = np.full(M, 0.5)
pij = np.full((M, M), 0.2)
np.fill_diagonal(pij, 0.5)

# ---- closed-form assembly (mirrors the library) ----
means = mu
totals = np.array([means[cluster_of == i].sum() for i in range(M)])

H = 1                                                    # FPPS: D = (pi)
d_col = pi.copy()
delta = (pi * (1 - pi) * d_col * d_col).sum()
phi = ((1 - pi) * d_col * totals).sum() / delta
eta = totals - pi * d_col * phi

var_mean = np.array([means[cluster_of == i].var(ddof=1) for i in range(M)])
corr_within = np.zeros(M)
for i in range(M):
    idx = np.where(cluster_of == i)[0]
    sub = R[np.ix_(idx, idx)]
    corr_within[i] = sub.sum() - np.trace(sub)

m_over_mh = M / (M - H)
n_s = min(n_bar, N_i)
within_factor = N_i * (n_s - 1) / (n_s * (N_i - 1))

eta2_t = (m_over_mh * (1 / pi - 1) * eta**2).sum()
srswor_t = ((1 / pi) * var_mean * N_i * (N_i - n_s) / n_s).sum()
# census side of the unit-variance term: V_M(Y) carries one sigma_u^2 per
# person (N_i per cluster), not N_i^2
unit_t = ((1 / pi) * N_i**2 * sigma_u2 / n_s - N_i * sigma_u2).sum()
within_t = ((1 / pi) * sigma_u2 * corr_within * within_factor
            - sigma_u2 * corr_within).sum()
between_t = 0.0
for i in range(M):
    for l in range(i + 1, M):
        ii = np.where(cluster_of == i)[0]
        ll = np.where(cluster_of == l)[0]
        c = R[np.ix_(ii, ll)].sum()
        between_t += 2 * (pij[i, l] / (pi[i] * pi[l]) - 1) * sigma_u2 * c

av = eta2_t + srswor_t + unit_t + within_t + between_t
print(f"components: eta2={eta2_t:.4f} srswor={srswor_t:.4f} unit={unit_t:.4f} "
      f"within={within_t:.4f} between={between_t:.4f}")
print(f"AV (formula) = {av:.4f}")

# ---- brute force ----
subsets = np.array(list(itertools.combinations(range(M), m)))   # 20 x 3
reps = 100_000
sq = np.empty(reps)
chunk = 10_000
w = (1 / 0.5) * (N_i / n_s)                                     # 6.0
for lo in range(0, reps, chunk):
    k = min(chunk, reps - lo)
    y = mu[None, :] + rng.standard_normal((k, 36)) @ L.T
    Y = y.sum(axis=1)
    pick = subsets[rng.integers(0, len(subsets), size=k)]       # k x 3
    est = np.zeros(k)
    order = rng.random((k, M, N_i)).argsort(axis=2)[:, :, :n_s]  # k x M x 2
    for j in range(m):
        ci = pick[:, j]
        base = ci * N_i
        sel = base[:, None] + order[np.arange(k), ci, :]
        est += w * y[np.arange(k)[:, None], sel].sum(axis=1)
    sq[lo:lo + k] = (est - Y) ** 2

emp = sq.mean()
se = sq.std(ddof=1) / np.sqrt(reps)
print(f"empirical E_P E_M (Yhat-Y)^2 = {emp:.4f}  (MC se {se:.4f})")
print(f"ratio formula/empirical = {av / emp:.4f}")

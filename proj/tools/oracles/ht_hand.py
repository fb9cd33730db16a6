#!/usr/bin/env python3
"""Hand arithmetic for the two-stage Horvitz-Thompson estimate on a 3-cluster
toy frame.

Frame: clusters of sizes (4, 3, 5), infected counts y summing per cluster to
(2, 1, 3). First-stage draw S = {0, 2} with weights w_I = 1/pi_I; second stage
n_bar = 2 per selected cluster, w_II = N_i / n_i.

pi (m=2, N=12): pi_0 = 2*4/12 = 2/3, pi_2 = 2*5/12 = 5/6.
Suppose the second-stage samples catch y-sums (1, 2).
  cluster 0: (1/(2/3)) * (4/2) * 1 = 1.5 * 2 * 1 = 3
  cluster 2: (1/(5/6)) * (5/2) * 2 = 1.2 * 2.5 * 2 = 6
  total = 9
"""
from fractions import Fraction as F

pi0 = F(2, 3)
pi2 = F(5, 6)
est = (1 / pi0) * F(4, 2) * 1 + (1 / pi2) * F(5, 2) * 2
print("HT estimate =", est, "=", float(est))

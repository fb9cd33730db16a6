#!/usr/bin/env python3
"""Fixed point of the PPS truncation/redistribution rule.

pi_i = m * N_i / N; while any pi > 1, clamp those to 1 and re-spread the
remaining size budget proportionally over the unclamped clusters.
"""
import numpy as np


def pps(counts, m):
    counts = np.asarray(counts, dtype=float)
    pi = m * counts / counts.sum()
    clamped = np.zeros(len(counts), dtype=bool)
    for _ in range(len(counts)):
        over = (pi > 1.0) & ~clamped
        if not over.any():
            break
        clamped |= over
        pi[clamped] = 1.0
        budget = m - clamped.sum()
        free = ~clamped
        pi[free] = budget * counts[free] / counts[free].sum()
    return pi


if __name__ == "__main__":
    print("N=(50,50,100)  m=2 ->", pps([50, 50, 100], 2))
    print("N=(1000,1,1)   m=2 ->", pps([1000, 1, 1], 2))
    print("N=(1000,1,1)   sum ->", pps([1000, 1, 1], 2).sum())
    # two rounds of truncation needed
    print("N=(100,90,1,1) m=3 ->", pps([100, 90, 1, 1], 3))
    print("N=(100,90,1,1) sum ->", pps([100, 90, 1, 1], 3).sum())

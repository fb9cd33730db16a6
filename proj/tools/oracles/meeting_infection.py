#!/usr/bin/env python3
"""Closed-form infection probability for the two-person meeting process.

Setup: one cell containing exactly {S, A}, infection probability per contagious
contact i_m = 1. The number of meetings in the cell is Poisson(c_n). Each
meeting draws a size ~ Poisson(c_p) capped at the pool size (2); meetings with
size < 2 do nothing. A size-2 meeting must contain both persons, so it exposes
the susceptible with probability i_m = 1.

P(meeting is effective) = P(Poisson(c_p) >= 2) = 1 - e^{-c_p}(1 + c_p)
P(S exposed in a day)   = 1 - E[(1-q)^K], K ~ Poisson(c_n)  = 1 - e^{-c_n q}

The thinned-Poisson identity gives the exact value; a brute-force enumeration
over truncated supports confirms it.
"""
import math


def effective_meeting_prob(c_p):
    return 1.0 - math.exp(-c_p) * (1.0 + c_p)


def exposure_prob(c_n, c_p):
    return 1.0 - math.exp(-c_n * effective_meeting_prob(c_p))


def exposure_prob_enumerated(c_n, c_p, kmax=200):
    q = effective_meeting_prob(c_p)
    p_no = 0.0
    pk = math.exp(-c_n)  # P(K = 0), then recur P(K=k) = P(K=k-1) * c_n / k
    for k in range(kmax):
        p_no += pk * (1.0 - q) ** k
        pk *= c_n / (k + 1)
    return 1.0 - p_no


if __name__ == "__main__":
    for c_n, c_p in [(3.0, 4.0), (5.0, 5.0), (0.5, 2.0)]:
        closed = exposure_prob(c_n, c_p)
        enum = exposure_prob_enumerated(c_n, c_p)
        sigma = math.sqrt(closed * (1 - closed) / 1e5)
        print(f"c_n={c_n} c_p={c_p}: q={effective_meeting_prob(c_p):.10f} "
              f"p={closed:.10f} (enum {enum:.10f}), 4*sigma@1e5={4*sigma:.5f}")

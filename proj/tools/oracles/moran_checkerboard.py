#!/usr/bin/env python3
"""Direct evaluation of Moran's I for small grids, used to freeze expected
values in the C++ tests.

I = (n / W) * sum_ij w_ij z_i z_j / sum_i z_i^2,  z_i = x_i - mean(x),
with w row-standardized. For a perfect checkerboard under rook contiguity
every neighbor of i has the opposite value, so the row mean of neighbors is
exactly -z_i and I = -1 regardless of grid size.
"""
import numpy as np


def moran(values, nx, ny, queen=False):
    x = np.asarray(values, dtype=float).reshape(ny, nx)
    n = nx * ny
    z = x - x.mean()
    num = 0.0
    wsum = 0.0
    for r in range(ny):
        for c in range(nx):
            nbr = []
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    if dr == 0 and dc == 0:
                        continue
                    if not queen and dr != 0 and dc != 0:
                        continue
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < ny and 0 <= cc < nx:
                        nbr.append((rr, cc))
            w = 1.0 / len(nbr)
            for rr, cc in nbr:
                num += w * z[r, c] * z[rr, cc]
                wsum += w
    return (n / wsum) * num / (z * z).sum()


def checkerboard(nx, ny):
    return [(r + c) % 2 for r in range(ny) for c in range(nx)]


if __name__ == "__main__":
    print("2x2 rook checkerboard :", moran(checkerboard(2, 2), 2, 2))
    print("4x4 rook checkerboard :", moran(checkerboard(4, 4), 4, 4))
    print("20x20 rook checkerboard:", moran(checkerboard(20, 20), 20, 20))
    print("2x2 queen checkerboard:", moran(checkerboard(2, 2), 2, 2, queen=True))
    print("4x4 queen checkerboard:", moran(checkerboard(4, 4), 4, 4, queen=True))
    # a fixed non-symmetric case to pin the general queen-weights code path
    vals = [0, 1, 2, 3, 0, 1, 2, 3, 4, 0, 1, 2, 3, 4, 0, 1]
    print("4x4 queen gradient-ish:", repr(moran(vals, 4, 4, queen=True)))
    print("4x4 rook  gradient-ish:", repr(moran(vals, 4, 4, queen=False)))

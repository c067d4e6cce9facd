"""
Covering numbers and the large-scale dimension of lattices
==========================================================

Counts open balls on the integers and on the square lattice, checks the
covering/packing sandwich, and reads off dimensions from log-log slopes.
"""
from __future__ import annotations

import numpy as np

from asydim import MetricSpace, ScaleGrid, asymptotic_dim, doubling_constant, gen_lattice
from asydim.fitting import geometric_grid
from asydim.metric import covering_number, exact_covering_number, exact_packing_number

# A 21-point line: every open ball of radius 1.5 holds three integers.
line = MetricSpace(np.arange(21, dtype=float)[:, None])
pts = np.arange(21)
cover = covering_number(line, pts, 1.5)
print("cover of the 21-point line at r=1.5:", cover.count, "centers", cover.centers.tolist())

# The sandwich n_r >= nu_r >= n_2r, exactly, on a random planar sample.
rng = np.random.default_rng(0)
cloud = MetricSpace(rng.random((25, 2)))
for r in (0.05, 0.1, 0.2):
    n_r = exact_covering_number(cloud, np.arange(25), r)
    nu_r = exact_packing_number(cloud, np.arange(25), r)
    n_2r = exact_covering_number(cloud, np.arange(25), 2 * r)
    print(f"r={r}: n_r={n_r} >= nu_r={nu_r} >= n_2r={n_2r}")

# Z: covers by 4-balls of growing balls B(0, R).
Z = MetricSpace(np.arange(-20000, 20001, dtype=float)[:, None], basepoint=20000, check_samples=0)
est = asymptotic_dim(Z, ScaleGrid([4.0], geometric_grid(16, 2 ** 13)))
print("d_inf(Z) estimate:", round(est.value, 4))
for (lo, hi), slope in est.window_slopes:
    print(f"   window R in [{lo:g}, {hi:g}]: slope {slope:.4f}")

# Z^2 with the sup metric and its counting-measure oracle.
Z2 = gen_lattice(2, 64)
est = asymptotic_dim(Z2, ScaleGrid([1.0], geometric_grid(4, 64)), method="volume")
A, bound = doubling_constant(Z2.volume, ScaleGrid([1.0], geometric_grid(4, 32)))
print("d_inf(Z^2) from volumes:", round(est.value, 4), "| doubling A =", round(A, 3),
      "so d_inf <= log2 A =", round(bound, 3))

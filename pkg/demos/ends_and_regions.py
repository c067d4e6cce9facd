"""
Volume growth of regions and ends
=================================

Analytic volume oracles for the parabolic region, the Davies ends and the
oscillating end whose upper and lower growth exponents differ.
"""
from __future__ import annotations

from asydim import ScaleGrid, asymptotic_dim_volume, davies_end, end_volume, oscillating_dim_gap
from asydim.fitting import LIMINF, LIMSUP, geometric_grid
from asydim.spaces import parabolic_area

# The region |y| <= x^alpha grows like R^(1 + alpha).
grid = ScaleGrid([1.0], geometric_grid(1e2, 1e4))
for alpha in (0.25, 0.5, 1.0):
    est = asymptotic_dim_volume(lambda R: parabolic_area(alpha, R), grid)
    print(f"parabolic region alpha={alpha}: {est.value:.4f} (expected {1 + alpha})")

# Davies ends: profile x^((D-1)/(N-1)) gives slab volumes ~ r^D.
grid = ScaleGrid([1.0], geometric_grid(10, 1e6))
for D in (2, 3, 4.5):
    end = davies_end(D)
    est = asymptotic_dim_volume(lambda r: end_volume(end, r), grid)
    print(f"Davies end D={D}: {est.value:.5f}")

# The oscillating end: along one breakpoint subsequence volumes are
# quadratic, along the interleaved one they grow like a power 3/2.
rep = oscillating_dim_gap(4)
print("exponent log vol / log R along a_2n:  ", {n: round(v, 4) for n, v in rep.even.items()})
print("exponent log vol / log R along a_2n-1:", {n: round(v, 4) for n, v in rep.odd.items()})
print(f"{LIMSUP} {rep.limsup:.4f}, {LIMINF} {rep.liminf:.4f}, gap {rep.gap:.4f}")

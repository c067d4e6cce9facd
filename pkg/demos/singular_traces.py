"""
Rearrangements, eccentricity and singular traces
================================================

Works directly with monotone functions: inverts a distribution function,
checks the power-exponent duality, classifies eccentricity and evaluates
the singular trace functional.
"""
from __future__ import annotations

import numpy as np

from asydim import (MonotoneFunction, duality_check, eccentricity_test, power_exponent,
                    power_transform, rearrangement, singular_trace)
from asydim.spectral import STEP

# A finite-rank step function and its generalized inverse.
lam = MonotoneFunction([1.0, 2.5, 4.0], [3.0, 1.0, 0.0], STEP, head=5.0)
mu = rearrangement(lam)
print("mu breakpoints", mu.args.tolist(), "values", mu.values.tolist(), "head", mu.head)
print("inverse twice gives back lambda:", rearrangement(mu) == lam)

# lambda(s) = s^-2 has exponent 2 on both sides of the duality.
rep = duality_check(MonotoneFunction.power_law(-2.0, lo=1e-6, hi=1e6))
print(f"duality: alpha(mu) {rep.left:.4f} vs limsup side {rep.right:.4f}")

# Only mu ~ 1/t is eccentric; raising mu to alpha(mu) repairs the others.
for p in (0.5, 1.0, 2.0):
    mu_p = MonotoneFunction.power_law(-p)
    ecc = eccentricity_test(mu_p)
    fixed = eccentricity_test(power_transform(mu_p, power_exponent(mu_p)))
    print(f"t^-{p}: {ecc.label} ({ecc.branch}, ratio limit {ecc.limit:.4f}); "
          f"after power transform: {fixed.label}")

# The trace is normalized on T, homogeneous, and small on bounded inputs.
T = MonotoneFunction.power_law(-1.0)
print("trace(T) =", singular_trace(T, T), "| trace(3T) =", singular_trace(T.scaled(3.0), T),
      "| trace(1) =", round(singular_trace(MonotoneFunction.power_law(0.0), T), 4))

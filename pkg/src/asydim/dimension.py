"""Kolmogorov dimension, asymptotic dimension and the doubling-constant bound.

All estimators count at a ladder of scales and report windowed log-log
slopes; see :mod:`asydim.fitting` for the limsup/liminf surrogates.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EstimationError
from .fitting import LIMSUP, MODES, DimEstimate, ScaleGrid, fit_power_law
from .metric import ball, covering_number, packing_number

METHODS = ("covering", "packing", "volume")


def _count(space, omega, r, method):
    if method == "covering":
        return covering_number(space, omega, r).count
    if method == "packing":
        return packing_number(space, omega, r).count
    raise DomainError(f"unknown counting method {method!r}")


def _check_mode(mode):
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")


def kolmogorov_dim(space, grid, method="covering"):
    """Local dimension: growth of ``n_r(B(x, R))`` as ``r`` shrinks, for each outer ``R``.

    The reported value comes from the largest ``R``; per-``R`` values sit in
    ``diagnostics["per_R"]`` so stabilization of the outer limit is visible.
    """
    if space.size == 1:
        return DimEstimate(0.0, [], [], LIMSUP, method, {"per_R": {}})
    per_R = {}
    best = None
    for R in grid.R_values:
        omega = ball(space, space.basepoint, R)
        rs = grid.r_values[grid.r_values < R]
        if rs.size < grid.window_size or omega.size == 0:
            continue
        counts = np.array([_count(space, omega, r, method) for r in rs], dtype=float)
        est = fit_power_law(rs, counts, grid.window_size, LIMSUP, method, reciprocal_scale=True,
                            check_divergence=False)
        per_R[float(R)] = est.value
        best = est
    if best is None:
        raise EstimationError(f"fewer than {grid.window_size} valid inner scales")
    best.diagnostics["per_R"] = per_R
    return best


def _counts_for(space, r, Rs, method):
    return np.array([_count(space, ball(space, space.basepoint, R), r, method) for R in Rs],
                    dtype=float)


def asymptotic_dim(space, grid, mode=LIMSUP, method="covering", workers=1):
    """Large-scale dimension from the growth of ``n_r(B(x, R))`` in ``R``.

    For each inner radius ``r`` the outer radii ``R >= grid.min_ratio * r``
    (and not beyond the basepoint eccentricity, where balls saturate) are
    fitted; the reported value is the one at the largest ``r`` that still
    has ``grid.window_size`` outer scales. ``method="volume"`` uses the ball
    volume (counting measure or the space's oracle) and ignores ``r``.
    """
    _check_mode(mode)
    if method not in METHODS:
        raise DomainError(f"method must be one of {METHODS}")
    if space.size == 1:
        return DimEstimate(0.0, [], [], mode, method, {"per_r": {}})
    ecc = space.eccentricity()
    Rs_all = grid.R_values
    kept = Rs_all[Rs_all <= ecc] if space.volume_oracle is None else Rs_all
    diag = {"truncated_R": [float(R) for R in Rs_all if R not in kept]}
    if method == "volume":
        vols = np.array([space.volume(R) for R in kept])
        est = asymptotic_dim_volume(dict(zip(kept, vols)), grid, mode, _R_values=kept)
        est.diagnostics.update(diag)
        return est
    per_r = {}
    result = None
    valid = [(r, kept[kept >= grid.min_ratio * r]) for r in grid.r_values]
    valid = [(r, Rs) for r, Rs in valid if Rs.size >= grid.window_size]
    if not valid:
        raise EstimationError(f"no inner radius has {grid.window_size} outer scales")
    if workers and workers > 1 and len(valid) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            tables = list(pool.map(lambda rv: _counts_for(space, rv[0], rv[1], method), valid))
    else:
        tables = [_counts_for(space, r, Rs, method) for r, Rs in valid]
    for (r, Rs), counts in zip(valid, tables):
        est = fit_power_law(Rs, counts, grid.window_size, mode, method)
        per_r[float(r)] = est.value
        result = est
    diag["per_r"] = per_r
    diag["r_used"] = float(valid[-1][0])
    result.diagnostics.update(diag)
    return result


def asymptotic_dim_volume(volume, grid, mode=LIMSUP, _R_values=None):
    """Dimension from the growth exponent of a ball-volume function.

    ``volume`` is a callable ``R -> volume`` or a mapping defined on the grid.
    """
    _check_mode(mode)
    Rs = grid.R_values if _R_values is None else np.asarray(_R_values, dtype=float)
    vol = volume.__getitem__ if isinstance(volume, dict) else volume
    values = np.array([float(vol(R)) for R in Rs])
    if np.any(values <= 0):
        bad = Rs[values <= 0]
        raise EstimationError(f"nonpositive volume at R={bad.tolist()}")
    if np.any(np.diff(values) < 0):
        raise DomainError("volume must be nondecreasing in R")
    return fit_power_law(Rs, values, grid.window_size, mode, "volume")


def doubling_constant(volume, grid):
    """Doubling constant ``A = max V(2R)/V(R)`` over the grid and the bound ``log2 A``."""
    vol = volume.__getitem__ if isinstance(volume, dict) else volume
    ratios = []
    for R in grid.R_values:
        v1, v2 = float(vol(R)), float(vol(2.0 * R))
        if v1 <= 0:
            raise DomainError(f"volume must be positive, got {v1} at R={R}")
        ratios.append(v2 / v1)
    A = max(ratios)
    return A, math.log2(A)


@dataclass
class RoughIsometryReport:
    holds: bool
    distortion_ok: bool
    dense_ok: bool
    worst_lower: float
    worst_upper: float
    worst_gap: float
    dim_x: float | None = None
    dim_y: float | None = None
    notes: list = field(default_factory=list)

    @property
    def dim_difference(self):
        if self.dim_x is None or self.dim_y is None:
            return None
        return abs(self.dim_x - self.dim_y)


def rough_isometry_probe(space_x, space_y, f, a, b, eps, grid=None, *, pairs=2000,
                         density_samples=2000, method="covering", seed=0):
    """Sample the two rough-isometry conditions for ``f`` and compare asymptotic dimensions.

    Condition (i): ``d_X/a - b <= d_Y(f x1, f x2) <= a d_X + b`` on random pairs.
    Condition (ii): every sampled ``y`` lies within ``eps`` of the image
    (closed inequality, so the identity passes with ``eps = 0``).
    Failures are reported, never raised.
    """
    f = np.asarray(f, dtype=np.int64)
    if f.shape != (space_x.size,):
        raise DomainError("map must assign an image to every point of X")
    if a < 1 or b < 0 or eps < 0:
        raise DomainError("need a >= 1, b >= 0, eps >= 0")
    rng = np.random.default_rng(seed)
    worst_lo, worst_hi = 0.0, 0.0
    n = space_x.size
    ids = rng.integers(0, n, size=(min(pairs, max(n, 1) ** 2), 2))
    rows = {}
    for x1, x2 in ids:
        if x1 not in rows:
            rows[x1] = (space_x.distances_from(int(x1)), space_y.distances_from(int(f[x1])))
        dx_row, dy_row = rows[x1]
        dx, dy = dx_row[x2], dy_row[f[x2]]
        worst_lo = max(worst_lo, dx / a - b - dy)
        worst_hi = max(worst_hi, dy - a * dx - b)
        if len(rows) > 64:
            rows.clear()
    distortion_ok = worst_lo <= 1e-12 and worst_hi <= 1e-12

    image = np.unique(f)
    ys = (np.arange(space_y.size) if space_y.size <= density_samples
          else np.sort(rng.choice(space_y.size, density_samples, replace=False)))
    worst_gap = 0.0
    if space_y.metric in ("euclidean", "sup"):
        p = 2 if space_y.metric == "euclidean" else np.inf
        from scipy.spatial import cKDTree
        gaps, _ = cKDTree(space_y.coords[image]).query(space_y.coords[ys], p=p)
        worst_gap = float(np.max(gaps))
    else:
        for y in ys:
            worst_gap = max(worst_gap, float(np.min(space_y.distances_from(int(y), image))))
    dense_ok = worst_gap <= eps
    report = RoughIsometryReport(distortion_ok and dense_ok, distortion_ok, dense_ok,
                                 float(worst_lo), float(worst_hi), worst_gap)
    if not distortion_ok:
        report.notes.append("distance distortion exceeds the affine bounds")
    if not dense_ok:
        report.notes.append(f"image is not {eps}-dense: worst gap {worst_gap}")
    if grid is not None:
        report.dim_x = asymptotic_dim(space_x, grid, method=method).value
        report.dim_y = asymptotic_dim(space_y.with_basepoint(int(f[space_x.basepoint])), grid,
                                      method=method).value
    return report

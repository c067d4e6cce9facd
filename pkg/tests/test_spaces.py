from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from asydim.dimension import asymptotic_dim, asymptotic_dim_volume
from asydim.errors import DomainError, ResourceError
from asydim.fitting import ScaleGrid, geometric_grid
from asydim.metric import MetricSpace
from asydim.spaces import (OscillatingProfile, StandardEnd, davies_end, end_volume, flat_end,
                           gen_lattice, gen_parabolic_region, log_end_volume,
                           oscillating_dim_gap, oscillating_end, oscillating_profile,
                           parabolic_area, parabolic_area_lower)


def test_lattice_sizes():
    assert gen_lattice(1, 3).size == 7
    assert gen_lattice(2, 1).size == 9
    Z2 = gen_lattice(2, 64)
    assert Z2.size == 16641
    assert np.all(Z2.coords[Z2.basepoint] == 0)
    with pytest.raises(ResourceError):
        gen_lattice(3, 400)
    with pytest.raises(DomainError):
        gen_lattice(0, 3)


def test_parabolic_oracle_monotone_and_bounded_below():
    R = np.geomspace(0.5, 1e4, 60)
    for alpha in [0.25, 0.5, 1.0]:
        area = np.array([parabolic_area(alpha, r) for r in R])
        assert np.all(np.diff(area) > 0)
        low = np.array([parabolic_area_lower(alpha, r) for r in R])
        assert np.all(low <= area * (1 + 1e-12))


def test_parabolic_area_quadrature():
    for alpha in [0.5, 1.0]:
        for R in [3.0, 40.0]:
            # integrate the vertical chord of the region inside the disc
            chord = lambda x: 2 * min(x ** alpha, math.sqrt(max(R * R - x * x, 0.0)))
            val, _ = integrate.quad(chord, 0, R, limit=200, points=[R / math.sqrt(2)])
            assert parabolic_area(alpha, R) == pytest.approx(val, rel=1e-7)


def test_parabolic_dimension_oracles():
    grid = ScaleGrid([1.0], geometric_grid(1e2, 1e4))
    for alpha, target in [(1.0, 2.0), (0.5, 1.5)]:
        est = asymptotic_dim_volume(lambda R: parabolic_area(alpha, R), grid)
        assert abs(est.value - target) <= 0.05


def test_parabolic_sample_matches_area():
    space = gen_parabolic_region(0.5, 400.0, spacing=0.5)
    assert space.basepoint == 0 and np.all(space.coords[0] == 0)
    for R in [60.0, 200.0, 380.0]:
        count = int(np.sum(np.linalg.norm(space.coords, axis=1) < R))
        assert count == pytest.approx(space.volume(R), rel=0.01)
    with pytest.raises(DomainError):
        gen_parabolic_region(1.5, 10.0)


def test_flat_end_volume():
    end = flat_end()
    for r in [0.5, 3.0, 200.0]:
        assert end_volume(end, r) == pytest.approx(2 * math.pi * r, rel=1e-14)
    with pytest.raises(DomainError):
        end_volume(end, 0.0)


@pytest.mark.parametrize("D", [2, 3, 4.5])
def test_davies_end(D):
    end = davies_end(D)
    quad_end = StandardEnd(end.N, end.profile, end.cross_section_measure)
    for r in [1.0, 50.0, 1e4]:
        assert end_volume(quad_end, r) == pytest.approx(end_volume(end, r), rel=1e-8)
    grid = ScaleGrid([1.0], geometric_grid(10, 1e6))
    est = asymptotic_dim_volume(lambda r: end_volume(end, r), grid)
    assert abs(est.value - D) <= 0.1
    r = geometric_grid(10, 1e6)
    vol = np.array([end_volume(end, x) for x in r])
    assert np.all(np.diff(vol) > 0)


def test_davies_sandwich_bound():
    # vol within [r^D / c, c r^D] gives an estimate within log(c) / log(window ratio)
    D, c = 2.5, 3.0
    grid = ScaleGrid([1.0], geometric_grid(10, 1e6))
    wobble = lambda r: r ** D * c ** math.sin(math.log(r))
    est = asymptotic_dim_volume(wobble, grid)
    span = math.log(grid.R_values[3] / grid.R_values[0])
    assert abs(est.value - D) <= 2 * math.log(c) / span


def test_oscillating_breakpoints_and_values():
    prof = OscillatingProfile(4)
    assert [int(prof.a[k]) for k in range(1, 5)] == [4, 20, 276, 65812]
    assert oscillating_profile(1.0) == 1.0
    assert oscillating_profile(4.0) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        prof.value(0.5)
    with pytest.raises(DomainError):
        prof.value(prof.x_max * 2)


def test_oscillating_continuity_and_monotonicity():
    prof = OscillatingProfile(4)
    for k in range(1, 2 * 4 + 1):
        left, right = prof.one_sided(k)
        assert abs(left - right) <= 1e-9 * abs(right)
    xs = np.concatenate([np.linspace(1, 300, 3000), np.geomspace(300, 7e4, 500)])
    vals = [oscillating_profile(x) for x in xs]
    assert np.all(np.diff(vals) >= 0)


def test_oscillating_integral_matches_quadrature():
    prof = OscillatingProfile(3)
    f = lambda x: float(prof.value(x))
    pts = [float(prof.a[k]) for k in range(1, 5)]
    for x in [3.0, 20.0, 150.0, 276.0, 5000.0]:
        val, _ = integrate.quad(f, 1.0, x, points=[p for p in pts if p < x], limit=400,
                                epsrel=1e-11)
        assert float(prof.integral(x)) == pytest.approx(val, rel=1e-9)


def test_oscillating_end_log_volume():
    end = oscillating_end(3)
    r = 10.0
    assert log_end_volume(end, r) == pytest.approx(math.log(end_volume(end, r)), rel=1e-12)
    prof = OscillatingProfile(3)
    big = float(prof.a[6])
    assert log_end_volume(end, big - 1) > 0


def test_oscillating_gap():
    rep = oscillating_dim_gap(3)
    for n in (2, 3):
        assert 1.85 <= rep.even[n] <= 2.05
        assert 1.4 <= rep.odd[n] <= 1.6
    assert rep.gap >= 0.3
    with pytest.raises(DomainError):
        oscillating_dim_gap(2)


def test_oscillating_asymptotic_constants():
    # with a unit cross-section the volumes approach a^2/2 and (5/3) a^(3/2)
    prof = OscillatingProfile(4)
    even = prof.integral(prof.a[8]) / (prof.a[8] ** 2 / 2)
    odd = prof.integral(prof.a[7]) / (mpmath.mpf(5) / 3 * prof.a[7] ** mpmath.mpf(1.5))
    assert float(even) == pytest.approx(1.0, abs=0.01)
    assert float(odd) == pytest.approx(1.0, abs=0.01)


def cylinder_sample(length, step):
    x = np.arange(1.0, length, step)
    th = np.arange(0.0, 2 * math.pi, step)
    X, T = np.meshgrid(x, th, indexing="ij")
    return X.ravel(), T.ravel()


def test_slab_volume_bridge_flat():
    # geodesic balls of the flat cylinder against its slab volumes
    x, th = cylinder_sample(400.0, 0.5)
    dth = np.abs(th[:, None] - th[None, :])
    D = np.hypot(x[:, None] - x[None, :], np.minimum(dth, 2 * math.pi - dth))
    space = MetricSpace(matrix=D, basepoint=0, check_samples=0)
    grid = ScaleGrid([2.0], geometric_grid(16, 256))
    sampled = asymptotic_dim(space, grid).value
    slabs = asymptotic_dim_volume(lambda r: end_volume(flat_end(), r), grid).value
    assert abs(sampled - slabs) <= 0.2


def test_slab_volume_bridge_cone():
    # profile f(x) = x on a unit-measure circle is a planar sector of angle 1
    end = davies_end(2)
    r = np.arange(1.0, 300.0, 0.7)
    pts = []
    for rad in r:
        k = max(1, int(rad / 0.7))
        ang = (np.arange(k) + 0.5) / k
        pts.append(np.column_stack([rad * np.cos(ang), rad * np.sin(ang)]))
    coords = np.vstack(pts)
    space = MetricSpace(coords, "euclidean", basepoint=0, check_samples=0)
    grid = ScaleGrid([2.0], geometric_grid(16, 256))
    sampled = asymptotic_dim(space, grid).value
    slabs = asymptotic_dim_volume(lambda x: end_volume(end, x), grid).value
    assert abs(sampled - slabs) <= 0.2

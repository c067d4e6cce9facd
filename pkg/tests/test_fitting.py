from __future__ import annotations

import math

import numpy as np
import pytest

from asydim.errors import DomainError, EstimationError
from asydim.fitting import (LIMINF, LIMSUP, ScaleGrid, aggregate, fit_power_law, geometric_grid,
                            ols_slope, parse_grid, window_slopes)


def test_geometric_grid_ratio_and_count():
    g = geometric_grid(1, 1024)
    assert g.tolist() == [2.0 ** k for k in range(11)]
    g = geometric_grid(10, 1e4, num=40)
    assert len(g) == 40 and g[0] == 10 and math.isclose(g[-1], 1e4)


def test_parse_grid_forms():
    assert parse_grid("1,2,4").tolist() == [1.0, 2.0, 4.0]
    assert parse_grid("16..128").tolist() == [16.0, 32.0, 64.0, 128.0]
    g = parse_grid("1..1e4:geometric:40")
    assert len(g) == 40 and math.isclose(g[-1], 1e4)
    with pytest.raises(DomainError):
        parse_grid("abc")


def test_ols_slope_exact_line():
    x = np.arange(5.0)
    assert ols_slope(x, 3 * x + 1) == pytest.approx(3.0)
    with pytest.raises(EstimationError):
        ols_slope([1.0, 1.0], [0.0, 1.0])


def test_window_aggregation_modes():
    x = np.log(np.geomspace(1, 1e4, 9))
    y = np.concatenate([x[:5] * 1.0, x[4] + 2.0 * (x[5:] - x[4])])
    slopes = window_slopes(x, y, 3)
    assert aggregate(slopes, LIMSUP) == pytest.approx(2.0)
    assert aggregate(slopes, LIMINF) == pytest.approx(1.0)


def test_fit_power_law_recovers_exponent_and_divergence():
    R = geometric_grid(1, 2 ** 10)
    est = fit_power_law(R, 3 * R ** 1.5, 4, LIMSUP, "volume")
    assert est.value == pytest.approx(1.5)
    assert len(est.window_slopes) == len(R) - 3
    # a top-window jump above one unit of slope reads as infinite
    stats = R.copy()
    stats[-1] = R[-2] * 2.0 ** 3
    assert fit_power_law(R, stats, 2, LIMSUP, "volume").infinite


def test_fit_rejects_bad_input():
    with pytest.raises(EstimationError):
        fit_power_law([1, 2, 4, 8], [1, 0, 1, 1], 2, LIMSUP, "x")
    with pytest.raises(DomainError):
        fit_power_law([1, 1, 4, 8], [1, 2, 3, 4], 2, LIMSUP, "x")
    with pytest.raises(EstimationError):
        fit_power_law([1, 2], [1, 2], 4, LIMSUP, "x")


def test_scale_grid_validation():
    ScaleGrid([1.0, 2.0], [4.0, 8.0, 16.0])
    with pytest.raises(DomainError):
        ScaleGrid([1.0, 1.2], [4.0])
    with pytest.raises(DomainError):
        ScaleGrid([], [4.0])
    g = ScaleGrid.dyadic([1.0], 4, 64)
    assert g.R_values.tolist() == [4.0, 8.0, 16.0, 32.0, 64.0]

from __future__ import annotations

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asydim.errors import DomainError, EstimationError
from asydim.heat import LaplacianModel, roe_spectral_measure, roe_theta
from asydim.spaces import cycle_graph, path_graph
from asydim.spectral import (LOGLOG, STEP, GeneralizedLimitAt0, MonotoneFunction,
                             SpectralMeasure, counting_function, duality_check,
                             eccentricity_test, novikov_shubin, piecewise_power_law,
                             power_exponent, power_transform, read_monotone, rearrangement,
                             singular_trace, spectral_to_theta, write_monotone)

from conftest import T_GRID


def random_step(rng, k=None):
    k = int(rng.integers(0, 12)) if k is None else k
    args = np.sort(rng.choice(np.arange(1, 200), size=k, replace=False)).astype(float) / 10
    vals = np.sort(rng.choice(np.arange(0, 60), size=k))[::-1].astype(float) / 4
    head = (math.inf if rng.random() < 0.3
            else float(vals[0] + rng.integers(0, 5) if k else rng.integers(0, 5)))
    return MonotoneFunction(args, vals, STEP, head=head)


def brute_inverse(fn, t):
    """``inf{s >= 0 : fn(s) <= t}`` over the only candidates, 0 and the breakpoints."""
    cands = np.concatenate([[0.0], fn.args])
    ok = cands[np.asarray(fn(cands)) <= t]
    return ok.min() if ok.size else math.inf


def test_indicator_is_self_dual():
    ind = MonotoneFunction([1.0], [0.0], STEP, head=1.0)
    assert rearrangement(ind) == ind


def test_rearrangement_matches_definition():
    rng = np.random.default_rng(0)
    for _ in range(200):
        lam = random_step(rng)
        mu = rearrangement(lam)
        probes = np.unique(np.concatenate([[0.0], lam.values, lam.values + 0.125, [1e9]]))
        probes = probes[probes > 0]
        for t in probes:
            assert float(mu(t)) == brute_inverse(lam, t)


def test_rearrangement_involution_and_constants():
    rng = np.random.default_rng(1)
    for _ in range(500):
        lam = random_step(rng)
        assert rearrangement(rearrangement(lam)) == lam
    zero = MonotoneFunction([], [], STEP, head=0.0)
    assert rearrangement(rearrangement(zero)) == zero


def test_rearrangement_order_preserving():
    rng = np.random.default_rng(7)
    for _ in range(200):
        a = random_step(rng, k=6)
        grid = np.concatenate([a.args, [a.args[-1] + 1]]) if a.args.size else np.array([1.0])
        bump = MonotoneFunction(a.args, a.values + 0.5, STEP,
                                head=a.head + 0.5 if math.isfinite(a.head) else math.inf)
        ma, mb = rearrangement(a), rearrangement(bump)
        t = np.linspace(0.01, 20, 400)
        assert np.all(ma(t) <= mb(t))


def test_inverse_square_sampled():
    s = np.geomspace(1e-3, 1e3, 241)
    lam = MonotoneFunction(s, s ** -2.0, STEP, head=math.inf)
    mu = rearrangement(lam)
    t = np.geomspace(1e-5, 1e5, 50)
    # within one grid step of the analytic inverse
    ratio = mu(t) / t ** -0.5
    step = s[1] / s[0]
    assert np.all((ratio >= 1 - 1e-12) & (ratio <= step + 1e-12))


def test_power_exponent_fixtures():
    assert power_exponent(MonotoneFunction.power_law(-0.5)) == pytest.approx(2.0)
    const = MonotoneFunction(np.geomspace(1e-20, 1, 30), np.ones(30), LOGLOG)
    assert math.isinf(power_exponent(const))
    with pytest.raises(EstimationError):
        power_exponent(MonotoneFunction.power_law(-0.5, lo=1e-2, per_decade=1))


def test_duality_fixtures():
    lam = MonotoneFunction.power_law(-2.0, lo=1e-6, hi=1e6)
    rep = duality_check(lam)
    assert rep.left == pytest.approx(2.0) and rep.right == pytest.approx(2.0)
    finite = MonotoneFunction([1.0, 2.0], [1.0, 0.0], STEP, head=3.0)
    rep = duality_check(finite)
    assert rep.degenerate and math.isinf(rep.left) and math.isinf(rep.right)


def test_duality_step_version():
    s = np.geomspace(1e-4, 1e4, 321)
    lam = MonotoneFunction(s, s ** -1.5, STEP, head=math.inf)
    rep = duality_check(lam, num=41)
    assert rep.gap <= 0.1


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(min_value=-3.0, max_value=-0.5), min_size=1, max_size=4),
       st.integers(min_value=0, max_value=1000))
def test_duality_random_piecewise(exps, seed):
    rng = np.random.default_rng(seed)
    cuts = np.sort(rng.uniform(-5, 5, size=len(exps) - 1))
    pieces = [(1e-6, exps[0])] + [(10.0 ** c, e) for c, e in zip(cuts, exps[1:])]
    lam = piecewise_power_law(pieces, 1e-6, 1e6)
    assert duality_check(lam).gap <= 0.1


def test_spectral_to_theta_fixtures():
    t = np.geomspace(0.1, 10, 9)
    one = SpectralMeasure([0.0], [1.0])
    assert np.all(spectral_to_theta(one, t).values == 1.0)
    two = SpectralMeasure([0.0, 1.0], [0.5, 0.5])
    assert np.allclose(spectral_to_theta(two, t).values, 0.5 * (1 + np.exp(-t)), rtol=1e-15)


def test_cycle_theta_two_paths():
    N = 37
    k = np.arange(N)
    lam = 2 * (1 - np.cos(2 * np.pi * k / N))
    meas = SpectralMeasure(lam, np.full(N, 1 / N))
    t = np.geomspace(0.1, 100, 20)
    model = LaplacianModel(cycle_graph(N))
    theta = roe_theta(model, t, 0, with_sup=False).theta
    assert np.allclose(spectral_to_theta(meas, t).values, theta, atol=1e-10, rtol=0)


def test_counting_function_fixtures():
    N = counting_function(SpectralMeasure([0.0], [1.0]))
    assert N(0.0) == 1.0 and N(5.0) == 1.0
    n = 20
    lam = 2 * (1 - np.cos(2 * np.pi * np.arange(n) / n))
    N = counting_function(SpectralMeasure(lam, np.full(n, 1 / n)))
    grid = np.linspace(0, 4, 57)
    expected = [(lam <= g + 1e-12).sum() / n for g in grid]
    assert np.allclose(N(grid), expected, atol=1e-12)
    comp = N.complement()
    assert comp.interp == STEP and float(comp(5.0)) == pytest.approx(0.0, abs=1e-12)


def test_atoms_merge_degenerate_eigenvalues():
    meas = SpectralMeasure([0.0, 1.0, 1.0 + 1e-15, 2.0], [0.25] * 4)
    assert meas.eigenvalues.size == 3
    assert meas.weights.tolist() == [0.25, 0.5, 0.25]
    assert meas.total == 1.0


def test_novikov_shubin_scale_invariance():
    for d in [1.0, 2.0, 3.0]:
        for c in [0.01, 1.0, 50.0]:
            t = np.geomspace(1, 1e6, 25)
            th = MonotoneFunction(t, c * t ** (-d / 2), LOGLOG)
            assert novikov_shubin(th).value == pytest.approx(d, abs=1e-12)
    with pytest.raises(DomainError):
        novikov_shubin()


def test_path_counting_slope(path4096):
    t = T_GRID[T_GRID < 0.25 * path4096.saturation_time()]
    meas = roe_spectral_measure(path4096, 2048)
    N = counting_function(meas)
    rep = novikov_shubin(N=N, lambda_grid=1 / t[::-1])
    assert abs(rep.alpha_N / 2 - 0.5) <= 0.1


def test_eccentricity_fixtures():
    r1 = eccentricity_test(MonotoneFunction.power_law(-1.0))
    assert r1.eccentric and r1.branch == "divergent"
    r2 = eccentricity_test(MonotoneFunction.power_law(-0.5))
    assert not r2.eccentric and r2.branch == "integrable"
    assert r2.limit == pytest.approx(2 ** -0.5, abs=0.01)
    r3 = eccentricity_test(MonotoneFunction.power_law(-2.0))
    assert not r3.eccentric and r3.branch == "divergent"
    assert r3.limit == pytest.approx(2.0, abs=0.05)
    r4 = eccentricity_test(MonotoneFunction.power_law(-0.97))
    assert r4.label == "inconclusive"


@pytest.mark.parametrize("p,c", [(0.5, 1.0), (2.0, 1.0), (1.0, 1.0), (0.5, 3.0), (0.25, 0.2)])
def test_power_transform_is_eccentric(p, c):
    mu = MonotoneFunction.power_law(-p, scale=c)
    alpha = power_exponent(mu)
    assert math.isfinite(alpha)
    nu = power_transform(mu, alpha)
    assert eccentricity_test(nu).eccentric
    assert power_exponent(nu) == pytest.approx(1.0, abs=0.05)
    assert power_transform(mu, 1) is mu
    with pytest.raises(DomainError):
        power_transform(mu, 0)


def test_singular_trace_values():
    T = MonotoneFunction.power_law(-1.0)
    assert singular_trace(T, T) == 1.0
    assert singular_trace(T.scaled(2.0), T) == 2.0
    bounded = MonotoneFunction.power_law(0.0, scale=1.0)
    assert abs(singular_trace(bounded, T)) <= 0.02
    with pytest.raises(DomainError):
        singular_trace(T, MonotoneFunction.power_law(-0.5))
    ecc_int = power_transform(MonotoneFunction.power_law(-0.5), 2.0)
    assert singular_trace(ecc_int, ecc_int) == 1.0


def test_singular_trace_additive_on_step_surrogates():
    T = MonotoneFunction.power_law(-1.0)
    t = np.geomspace(1e-60, 1, 241)
    a = MonotoneFunction(t, 2 / t, STEP, head=math.inf)
    b = MonotoneFunction(t, 3 / np.sqrt(t), STEP, head=math.inf)
    s = MonotoneFunction(t, 2 / t + 3 / np.sqrt(t), STEP, head=math.inf)
    lhs = singular_trace(s, T)
    assert lhs == pytest.approx(singular_trace(a, T) + singular_trace(b, T), rel=1e-12)


def test_generalized_limit_range():
    rng = np.random.default_rng(4)
    t = np.geomspace(1e-30, 1, 61)
    omega = GeneralizedLimitAt0()
    for _ in range(50):
        v = rng.random(61)
        out = omega.apply(t, v)
        tail = v[np.log(t) <= np.log(t).min() + 0.1 * (np.log(t).max() - np.log(t).min()) + 1e-12]
        assert tail.min() - 1e-12 <= out <= tail.max() + 1e-12


def test_monotone_validation_and_integral():
    with pytest.raises(DomainError):
        MonotoneFunction([1.0, 2.0], [1.0, 2.0], STEP)
    with pytest.raises(DomainError):
        MonotoneFunction([2.0, 1.0], [1.0, 0.0], STEP)
    f = MonotoneFunction([1.0, 3.0], [2.0, 0.5], STEP, head=4.0)
    assert f.integral(0, 4) == 4 * 1 + 2 * 2 + 0.5 * 1
    g = MonotoneFunction.power_law(-0.5, lo=1e-8)
    assert g.integral(0, 1) == pytest.approx(2.0, rel=1e-12)
    assert math.isinf(MonotoneFunction.power_law(-1.0).integral(0, 1))


def test_exchange_round_trip(tmp_path):
    rng = np.random.default_rng(9)
    for _ in range(20):
        f = random_step(rng)
        buf = io.StringIO()
        write_monotone(f, buf)
        path = tmp_path / "f.csv"
        path.write_text(buf.getvalue())
        assert read_monotone(path) == f
    g = MonotoneFunction.power_law(-0.5, lo=1e-3)
    write_monotone(g, tmp_path / "g.csv")
    text = (tmp_path / "g.csv").read_text()
    assert "# interp=loglog_linear" in text
    assert read_monotone(tmp_path / "g.csv") == g

"""Monotone functions, rearrangement, Novikov-Shubin exponents and singular traces.

Operators enter only through sampled monotone functions: the distribution
function ``lambda_A(s)``, its non-increasing rearrangement ``mu_A(t)``, the
spectral counting function ``N(lambda)`` and the heat trace ``theta(t)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EstimationError
from .fitting import LIMINF, LIMSUP, fit_power_law
from .io import format_real, parse_real

STEP = "step_right_continuous"
LOGLOG = "loglog_linear"
INTERPOLATIONS = (STEP, LOGLOG)

# Distance to 1 under which an integral ratio counts as converged.
ECCENTRICITY_TOL = 0.02
# Tail exponent p of mu ~ t^(-p): below the first the integral at 0 converges,
# at or above the second it diverges; in between the branch is inconclusive.
INTEGRABLE_BELOW = 0.95
DIVERGENT_FROM = 0.995
# Eigenvalues closer than this (relative to the spectral radius) form one atom.
ATOM_RTOL = 1e-12


class MonotoneFunction:
    """Nonincreasing function on ``[0, inf)`` given by breakpoints.

    ``step_right_continuous``: the value is ``head`` on ``[0, args[0])`` and
    ``values[i]`` on ``[args[i], args[i+1])``, the last value holding to
    infinity. Step functions are stored canonically, without breakpoints
    where the value does not change.

    ``loglog_linear``: samples of a positive function joined by power laws;
    outside the sampled range the first and last segments are extended.
    """

    def __init__(self, args, values, interp=STEP, head=None):
        if interp not in INTERPOLATIONS:
            raise DomainError(f"interpolation must be one of {INTERPOLATIONS}")
        args = np.asarray(args, dtype=float).ravel()
        values = np.asarray(values, dtype=float).ravel()
        if args.shape != values.shape:
            raise DomainError("arguments and values differ in length")
        if np.any(args <= 0) or np.any(np.diff(args) <= 0):
            raise DomainError("arguments must be positive and strictly increasing")
        if np.any(np.isnan(values)) or np.any(values < 0):
            raise DomainError("values must be nonnegative")
        self.interp = interp
        if interp == STEP:
            if head is None:
                head = values[0] if values.size else 0.0
            chain = np.concatenate([[float(head)], values])
            if np.any(chain[1:] > chain[:-1]):
                raise DomainError("values must be nonincreasing")
            keep = chain[1:] != chain[:-1]
            args, values = args[keep], values[keep]
            self.head = float(head)
        else:
            if args.size < 2:
                raise DomainError("loglog interpolation needs at least two samples")
            if np.any(np.diff(values) > 0):
                raise DomainError("values must be nonincreasing")
            if np.any(values <= 0) or np.any(~np.isfinite(values)):
                raise DomainError("loglog samples must be positive and finite")
            self.head = math.inf
        self.args = args
        self.values = values

    @classmethod
    def from_callable(cls, fn, args, interp=LOGLOG, head=None):
        args = np.asarray(args, dtype=float)
        return cls(args, np.array([float(fn(a)) for a in args]), interp, head)

    @classmethod
    def power_law(cls, exponent, lo=1e-60, hi=1.0, per_decade=4, scale=1.0):
        """``scale * t**exponent`` sampled on a geometric grid (``exponent <= 0``)."""
        n = int(round(math.log10(hi / lo) * per_decade)) + 1
        t = np.geomspace(lo, hi, n)
        return cls(t, scale * t ** exponent, LOGLOG)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.interp == STEP:
            idx = np.searchsorted(self.args, x, side="right") - 1
            table = np.concatenate([[self.head], self.values])
            return table[idx + 1]
        lx, la, lv = np.log(x), np.log(self.args), np.log(self.values)
        i = np.clip(np.searchsorted(la, lx, side="right") - 1, 0, la.size - 2)
        slope = (lv[i + 1] - lv[i]) / (la[i + 1] - la[i])
        return np.exp(lv[i] + slope * (lx - la[i]))

    def __eq__(self, other):
        if not isinstance(other, MonotoneFunction):
            return NotImplemented
        return (self.interp == other.interp and self.head == other.head
                and np.array_equal(self.args, other.args)
                and np.array_equal(self.values, other.values))

    def __repr__(self):
        return f"MonotoneFunction({self.interp}, {self.args.size} breakpoints, head={self.head})"

    @property
    def eventually_zero(self):
        return self.interp == STEP and (self.values[-1] == 0 if self.values.size else self.head == 0)

    def scaled(self, c):
        if c < 0:
            raise DomainError("scale must be nonnegative")
        head = self.head * c if self.interp == STEP else None
        return MonotoneFunction(self.args, self.values * c, self.interp, head)

    def tail_exponent(self):
        """Exponent ``p`` of ``f ~ t**(-p)`` on the first loglog segment."""
        if self.interp == STEP:
            if math.isinf(self.head):
                return math.inf
            return 0.0
        return -math.log(self.values[1] / self.values[0]) / math.log(self.args[1] / self.args[0])

    def integral(self, a, b):
        """``int_a^b f`` computed exactly on the stored representation (may be ``inf``)."""
        if not 0 <= a <= b:
            raise DomainError("need 0 <= a <= b")
        if a == b:
            return 0.0
        if self.interp == STEP:
            return self._step_integral(a, b)
        return self._loglog_integral(a, b)

    def _step_integral(self, a, b):
        edges = np.concatenate([[0.0], self.args, [math.inf]])
        vals = np.concatenate([[self.head], self.values])
        lo = np.clip(edges[:-1], a, b)
        hi = np.clip(edges[1:], a, b)
        width = hi - lo
        live = width > 0
        if np.any(np.isinf(vals[live])):
            return math.inf
        return float(np.dot(vals[live], width[live]))

    def _loglog_integral(self, a, b):
        # each piece is v0 * (x/x0)^q; the extensions reuse the end segments
        x, v = self.args, self.values
        knots = np.concatenate([[a], x[(x > a) & (x < b)], [b]])
        total = 0.0
        for lo, hi in zip(knots[:-1], knots[1:]):
            i = int(np.clip(np.searchsorted(x, lo, side="right") - 1, 0, x.size - 2))
            x0, v0 = x[i], v[i]
            q = math.log(v[i + 1] / v0) / math.log(x[i + 1] / x0)
            total += _power_piece(x0, v0, q, lo, hi)
            if math.isinf(total):
                return math.inf
        return total


def _power_piece(x0, v0, q, lo, hi):
    if lo == 0:
        if q <= -1:
            return math.inf
        return v0 * x0 * (hi / x0) ** (q + 1) / (q + 1)
    if abs(q + 1) < 1e-12:
        return v0 * x0 * math.log(hi / lo)
    return v0 * x0 * ((hi / x0) ** (q + 1) - (lo / x0) ** (q + 1)) / (q + 1)


def rearrangement(fn):
    """Generalized inverse ``mu(t) = inf{s >= 0 : fn(s) <= t}``.

    Exact on step functions, and an involution on them. In loglog mode the
    samples must be strictly decreasing and the pairs are swapped.
    """
    if fn.interp == LOGLOG:
        if np.any(np.diff(fn.values) >= 0):
            raise DomainError("loglog rearrangement needs strictly decreasing samples")
        return MonotoneFunction(fn.values[::-1], fn.args[::-1], LOGLOG)
    s, v = fn.args, fn.values
    # levels in ascending order, each paired with the first s where fn drops to it
    levels = np.concatenate([v[::-1], [fn.head]])
    where = np.concatenate([s[::-1], [0.0]])
    if levels.size == 1:
        # constant function
        c = fn.head
        if c == 0:
            return MonotoneFunction([], [], STEP, head=0.0)
        if math.isinf(c):
            return MonotoneFunction([], [], STEP, head=math.inf)
        return MonotoneFunction([c], [0.0], STEP, head=math.inf)
    finite = np.isfinite(levels)
    levels, where = levels[finite], where[finite]
    if levels[0] == 0:
        head = where[0]
        args, vals = levels[1:], where[1:]
    else:
        head = math.inf
        args, vals = levels, where
    return MonotoneFunction(args, vals, STEP, head=head)


def piecewise_power_law(pieces, s_lo, s_hi, per_decade=24, scale=1.0):
    """Continuous piecewise power law ``s -> c_j * s**e_j`` sampled on a geometric grid.

    ``pieces`` lists ``(s_start, e_j)`` with ascending starts and all
    ``e_j <= 0``; the first piece applies from ``s_lo``.
    """
    s = np.geomspace(s_lo, s_hi, int(round(math.log10(s_hi / s_lo) * per_decade)) + 1)
    starts = np.array([a for a, _ in pieces[1:]] + [math.inf])
    exps = np.array([e for _, e in pieces], dtype=float)
    if np.any(exps > 0):
        raise DomainError("exponents must be nonpositive")
    # log value at each piece start, accumulated piece by piece
    ls = np.log(np.concatenate([[s_lo], starts[:-1]]))
    base = np.concatenate([[0.0], np.cumsum(exps[:-1] * np.diff(ls))])
    j = np.searchsorted(starts, s, side="right")
    out = scale * np.exp(base[j] + exps[j] * (np.log(s) - ls[j]))
    return MonotoneFunction(s, out, LOGLOG)


def _log_slope_estimate(fn, lo, hi, window, mode, reciprocal, num=None):
    """Window slopes of ``log fn`` against ``log x`` (or ``log 1/x``) on ``[lo, hi]``."""
    if fn.interp == LOGLOG and num is None:
        x = fn.args[(fn.args >= lo) & (fn.args <= hi)]
    else:
        x = np.geomspace(lo, hi, num or 41)
    y = np.asarray(fn(x), dtype=float)
    ok = np.isfinite(y) & (y > 0)
    x, y = x[ok], y[ok]
    if x.size < window:
        raise EstimationError(f"{x.size} usable samples, need {window}")
    return fit_power_law(x, y, window, mode, "heat", reciprocal_scale=reciprocal,
                         check_divergence=False)


def _finite_span(fn):
    """Argument range where a step function is finite and positive."""
    if fn.interp == LOGLOG:
        return fn.args[0], fn.args[-1]
    pts = fn.args
    vals = fn.values
    ok = np.isfinite(vals) & (vals > 0)
    if not np.any(ok):
        raise EstimationError("function has no finite positive values")
    return pts[ok][0], pts[ok][-1]


def power_exponent(mu, window=4, t_range=None, num=None):
    """``alpha = (liminf_{t->0} log mu(t) / log(1/t))**(-1)``.

    The liminf is the smallest window slope of ``log mu`` against
    ``log(1/t)``; a vanishing slope gives ``inf``.
    """
    lo, hi = t_range if t_range is not None else _finite_span(mu)
    est = _log_slope_estimate(mu, lo, hi, window, LIMINF, True, num)
    slope = est.value
    if slope <= 1e-12:
        return math.inf
    return 1.0 / slope


@dataclass
class DualityReport:
    left: float
    right: float
    gap: float
    degenerate: bool = False
    convention: str = ""


def duality_check(lam, window=4, num=None):
    """Compare ``alpha`` of the rearrangement with ``limsup log lambda(s) / log(1/s)``.

    For eventually-zero step functions both sides are infinite: ``log lambda``
    is ``-inf`` at large ``s`` and ``mu`` is bounded, so its slope vanishes.
    """
    if lam.eventually_zero:
        return DualityReport(math.inf, math.inf, 0.0, True,
                             "finite rank: both sides +infinity (slope 0 on the mu side)")
    lo, hi = _finite_span(lam)
    if hi / lo < 1e3:
        raise EstimationError("duality check needs at least three decades of arguments")
    right = _log_slope_estimate(lam, lo, hi, window, LIMSUP, True, num).value
    mu = rearrangement(lam)
    left = power_exponent(mu, window, num=num)
    return DualityReport(left, right, abs(left - right))


# -- spectral measures ------------------------------------------------------------

@dataclass
class SpectralMeasure:
    """Atoms ``(lambda_k, w_k)`` of the spectral measure ``dN``, eigenvalues ascending."""

    eigenvalues: np.ndarray
    weights: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if lam.shape != w.shape:
            raise DomainError("eigenvalues and weights differ in length")
        if np.any(w < 0):
            raise DomainError("weights must be nonnegative")
        if np.any(lam < -1e-9):
            raise DomainError("eigenvalues must be nonnegative")
        order = np.argsort(lam, kind="stable")
        lam, w = np.maximum(lam[order], 0.0), w[order]
        # merge numerically degenerate eigenvalues into one atom
        tol = ATOM_RTOL * max(1.0, float(lam[-1])) if lam.size else 0.0
        starts = np.concatenate([[True], np.diff(lam) > tol]) if lam.size else np.zeros(0, bool)
        groups = np.cumsum(starts) - 1
        self.eigenvalues = lam[starts]
        self.weights = np.bincount(groups, weights=w, minlength=int(starts.sum()))

    @property
    def total(self):
        return float(self.weights.sum())

    @property
    def atoms(self):
        return list(zip(self.eigenvalues.tolist(), self.weights.tolist()))


def spectral_to_theta(measure, t_grid):
    """``theta(t) = sum_k w_k exp(-lambda_k t)`` sampled on ``t_grid``."""
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0):
        raise DomainError("t_grid must be positive")
    theta = np.exp(-np.outer(t, measure.eigenvalues)) @ measure.weights
    return MonotoneFunction(t, theta, LOGLOG)


@dataclass
class CountingFunction:
    """``N(lambda) = sum_{lambda_k <= lambda} w_k``, nondecreasing and right-continuous."""

    eigenvalues: np.ndarray
    cumulative: np.ndarray
    lambda_grid: np.ndarray | None = None

    def __call__(self, lam):
        idx = np.searchsorted(self.eigenvalues, np.asarray(lam, dtype=float), side="right")
        table = np.concatenate([[0.0], self.cumulative])
        return table[idx]

    @property
    def total(self):
        return float(self.cumulative[-1]) if self.cumulative.size else 0.0

    def samples(self, lambda_grid=None):
        grid = self.lambda_grid if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
        if grid is None:
            raise DomainError("no lambda grid given")
        return grid, self(grid)

    def atoms_below(self, lambda_grid):
        """Distinct positive eigenvalues reached by snapping each grid point down to an atom.

        ``N`` is constant between atoms, so these are the samples that carry
        information; flat stretches between jumps would bias window slopes.
        """
        grid = np.asarray(lambda_grid, dtype=float)
        idx = np.searchsorted(self.eigenvalues, grid, side="right") - 1
        snapped = self.eigenvalues[idx[idx >= 0]]
        return np.unique(snapped[snapped > 0])

    def complement(self):
        """``total - N`` as a nonincreasing step function."""
        lam, cum = _distinct_levels(self.eigenvalues, self.cumulative)
        pos = lam > 0
        vals = self.total - cum
        head = self.total if lam.size and lam[0] > 0 else (float(vals[0]) if lam.size else 0.0)
        return MonotoneFunction(lam[pos], np.maximum(vals[pos], 0.0), STEP, head=max(head, 0.0))

    def distribution(self):
        """Distribution function of the inverse operator on the complement of the kernel.

        ``lambda(s) = sum_{0 < lambda_k < 1/s} w_k``, right-continuous with
        jumps at ``s = 1/lambda_k``.
        """
        lam, cum = _distinct_levels(self.eigenvalues, self.cumulative)
        pos = lam > 0
        kernel = float(cum[~pos][-1]) if np.any(~pos) else 0.0
        lam, cum = lam[pos], cum[pos] - kernel
        if lam.size == 0:
            return MonotoneFunction([], [], STEP, head=0.0)
        # after s = 1/lam_j only eigenvalues strictly below lam_j remain
        below = np.concatenate([[0.0], cum[:-1]])
        s = 1.0 / lam[::-1]
        return MonotoneFunction(s, below[::-1], STEP, head=float(cum[-1]))


def _distinct_levels(eigenvalues, cumulative):
    last = np.flatnonzero(np.diff(np.append(eigenvalues, math.inf)) > 0)
    return eigenvalues[last], cumulative[last]


def counting_function(measure, lambda_grid=None, normalization=1.0):
    """Spectral counting function of ``measure``, weights divided by ``normalization``."""
    if not normalization > 0:
        raise DomainError("normalization must be positive")
    cum = np.cumsum(measure.weights) / normalization
    grid = None if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    return CountingFunction(measure.eigenvalues.copy(), cum, grid)


@dataclass
class NSReport:
    """Novikov-Shubin exponent by each available route."""

    alpha_theta: float | None = None
    alpha_N: float | None = None
    alpha_inverse: float | None = None
    estimates: dict = field(default_factory=dict)

    @property
    def value(self):
        for v in (self.alpha_theta, self.alpha_N, self.alpha_inverse):
            if v is not None:
                return v
        raise EstimationError("no route was computed")

    @property
    def route_gap(self):
        vals = [v for v in (self.alpha_theta, self.alpha_N, self.alpha_inverse) if v is not None]
        return max(vals) - min(vals) if len(vals) > 1 else 0.0


def novikov_shubin(theta=None, N=None, lambda_grid=None, window=4, inverse=False):
    """``alpha_0`` from the large-time decay of ``theta`` and/or small-spectrum growth of ``N``.

    ``theta`` is a sampled :class:`MonotoneFunction`; its samples should stop
    before saturation. ``N`` is a :class:`CountingFunction` evaluated on
    ``lambda_grid`` (or its own grid). With ``inverse=True`` the route through
    the rearrangement of the inverse operator is computed as well.
    """
    if theta is None and N is None:
        raise DomainError("need theta or N")
    report = NSReport()
    if theta is not None:
        est = _log_slope_estimate(theta, theta.args[0], theta.args[-1], window, LIMSUP, True)
        report.alpha_theta = 2.0 * est.value
        report.estimates["theta"] = est
    if N is not None:
        grid, _ = N.samples(lambda_grid)
        atoms = N.atoms_below(grid)
        vals = N(atoms) - float(N(0.0))
        ok = vals > 0
        if ok.sum() < window:
            raise EstimationError("too little spectrum on the lambda grid")
        est = fit_power_law(atoms[ok], vals[ok], window, LIMSUP, "heat", check_divergence=False)
        report.alpha_N = 2.0 * est.value
        report.estimates["N"] = est
        if inverse:
            report.alpha_inverse = 2.0 * inverse_exponent(N, grid, window)
    return report


def inverse_exponent(N, lambda_grid, window=4):
    """``alpha`` of the inverse operator, via the rearrangement of its distribution function.

    The rearrangement is sampled at ``t_j = N(lambda_j) - N(0)`` for the atoms
    ``lambda_j`` picked by :meth:`CountingFunction.atoms_below`, so every
    window spans the same part of the spectrum as the counting-function route.
    """
    mu = rearrangement(N.distribution())
    t = np.unique(N(N.atoms_below(lambda_grid)) - float(N(0.0)))
    t = t[t > 0]
    if t.size < window:
        raise EstimationError("too little spectrum below the lambda grid")
    # left limits: the upper corner of each jump, matching N sampled at its atoms
    vals = mu(np.nextafter(t, 0.0))
    ok = np.isfinite(vals) & (vals > 0)
    est = fit_power_law(t[ok], vals[ok], window, LIMINF, "heat", reciprocal_scale=True,
                        check_divergence=False)
    return math.inf if est.value <= 1e-12 else 1.0 / est.value


# -- eccentricity and singular traces ----------------------------------------------

INTEGRABLE = "integrable"
DIVERGENT = "divergent"
INCONCLUSIVE = "inconclusive"


def _branch(mu):
    p = mu.tail_exponent()
    if p < INTEGRABLE_BELOW:
        return INTEGRABLE, p
    if p >= DIVERGENT_FROM:
        return DIVERGENT, p
    return INCONCLUSIVE, p


def _tail_points(mu, fraction=0.1, count=None):
    lo, hi = _finite_span(mu)
    upper = min(hi, 1.0)
    span = math.log(upper / lo)
    top = lo * math.exp(fraction * span)
    n = count or 25
    return np.geomspace(lo, top, n), upper


def _ratio_function(mu_num, mu_den, t, branch, upper):
    if branch == INTEGRABLE:
        num = np.array([mu_num.integral(0.0, x) for x in t])
        den = np.array([mu_den.integral(0.0, x) for x in t])
    else:
        num = np.array([mu_num.integral(x, upper) for x in t])
        den = np.array([mu_den.integral(x, upper) for x in t])
    return num / den


@dataclass
class EccentricityReport:
    eccentric: bool | None
    branch: str
    limit: float
    tail_exponent: float
    ratios: np.ndarray = field(repr=False, default=None)

    @property
    def label(self):
        if self.eccentric is None:
            return INCONCLUSIVE
        return "eccentric" if self.eccentric else "not_eccentric"


def eccentricity_test(mu, fraction=0.1, tol=ECCENTRICITY_TOL):
    """Decide whether ``mu`` is eccentric at 0.

    Integrable branch: ``limsup int_0^t mu / int_0^{2t} mu = 1``.
    Divergent branch: ``liminf int_t^1 mu / int_{2t}^1 mu = 1``.
    The limits are the max (resp. min) of the ratio over the smallest
    ``fraction`` of the sampled ``log t`` range.
    """
    branch, p = _branch(mu)
    if branch == INCONCLUSIVE:
        return EccentricityReport(None, branch, math.nan, p)
    t, upper = _tail_points(mu, fraction)
    t = t[2 * t < upper]
    if branch == INTEGRABLE:
        ratios = np.array([mu.integral(0.0, x) / mu.integral(0.0, 2 * x) for x in t])
        limit = float(ratios.max())
    else:
        ratios = np.array([mu.integral(x, upper) / mu.integral(2 * x, upper) for x in t])
        limit = float(ratios.min())
    return EccentricityReport(abs(limit - 1.0) <= tol, branch, limit, p, ratios)


def power_transform(mu, alpha):
    """Pointwise power ``mu**alpha``, the rearrangement of ``T**alpha``."""
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if alpha == 1:
        return mu
    head = mu.head ** alpha if mu.interp == STEP else None
    return MonotoneFunction(mu.args, mu.values ** alpha, mu.interp, head)


@dataclass
class GeneralizedLimitAt0:
    """Cesaro average in ``log(1/t)`` over the smallest ``fraction`` of the sampled range.

    The average always lies between the min and max of the tail samples.
    """

    kind: str = "cesaro_log"
    fraction: float = 0.1

    def __post_init__(self):
        if self.kind not in ("cesaro_log", "last_scale"):
            raise DomainError(f"unknown generalized limit {self.kind!r}")
        if not 0 < self.fraction <= 1:
            raise DomainError("fraction must lie in (0, 1]")

    def weights(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "last_scale":
            w = np.zeros(t.size)
            w[np.argmin(t)] = 1.0
            return w
        lt = np.log(t)
        cut = lt.min() + self.fraction * (lt.max() - lt.min())
        tail = lt <= cut + 1e-12
        w = np.zeros(t.size)
        x = lt[tail]
        if x.size == 1:
            w[tail] = 1.0
            return w
        order = np.argsort(x)
        xs = x[order]
        tw = np.zeros(xs.size)
        tw[:-1] += np.diff(xs) / 2
        tw[1:] += np.diff(xs) / 2
        sub = np.zeros(xs.size)
        sub[order] = tw
        w[tail] = sub
        return w

    def apply(self, t, values):
        w = self.weights(t)
        v = np.asarray(values, dtype=float)
        return float(np.average(v, weights=w))

    def shift_sensitivity(self, t, values):
        """Change in the limit when the tail window drops its smallest sample."""
        t = np.asarray(t, dtype=float)
        keep = t > t.min()
        if keep.sum() < 2:
            return 0.0
        return abs(self.apply(t, values) - self.apply(t[keep], np.asarray(values)[keep]))


@dataclass
class SingularTrace:
    value: float
    branch: str
    t: np.ndarray = field(repr=False)
    ratio: np.ndarray = field(repr=False)
    shift_sensitivity: float = 0.0


def singular_trace(mu_A, mu_T, omega=None, num=201, full=False):
    """``omega`` applied to the branch-matched ratio of integrals of ``mu_A`` and ``mu_T``.

    ``mu_T`` must be eccentric. A divergent ``mu_A`` against an integrable
    ``mu_T`` is a branch mismatch; a bounded ``mu_A`` is accepted on either
    branch (its trace is expected to vanish on the divergent one).
    """
    omega = omega or GeneralizedLimitAt0()
    ecc = eccentricity_test(mu_T)
    if not ecc.eccentric:
        raise DomainError(f"mu_T is not eccentric ({ecc.label}, limit {ecc.limit})")
    branch_A, _ = _branch(mu_A)
    if branch_A == INCONCLUSIVE or (branch_A == DIVERGENT and ecc.branch == INTEGRABLE):
        raise DomainError(f"branch mismatch: mu_A is {branch_A}, mu_T is {ecc.branch}")
    lo = max(_finite_span(mu_T)[0], _finite_span(mu_A)[0])
    upper = min(1.0, _finite_span(mu_T)[1], _finite_span(mu_A)[1])
    t = np.geomspace(lo, upper, num)[:-1]
    ratio = _ratio_function(mu_A, mu_T, t, ecc.branch, upper)
    value = omega.apply(t, ratio)
    if not full:
        return value
    return SingularTrace(value, ecc.branch, t, ratio, omega.shift_sensitivity(t, ratio))


# -- exchange format --------------------------------------------------------------

def write_monotone(fn, path, header_lines=()):
    """Write ``t,value`` rows; ``path`` may also be an open text stream."""
    if hasattr(path, "write"):
        _write_monotone(fn, path, header_lines)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        _write_monotone(fn, fh, header_lines)


def _write_monotone(fn, fh, header_lines):
    for line in header_lines:
        fh.write(f"# {line}\n")
    fh.write(f"# interp={fn.interp}\n")
    if fn.interp == STEP:
        fh.write(f"# head={format_real(fn.head)}\n")
    fh.write("t,value\n")
    for a, v in zip(fn.args, fn.values):
        fh.write(f"{format_real(a)},{format_real(v)}\n")


def read_monotone(path):
    interp, head, args, vals = STEP, None, [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("interp="):
                    interp = body[len("interp="):]
                elif body.startswith("head="):
                    head = parse_real(body[len("head="):])
                continue
            if line.replace(" ", "") == "t,value":
                continue
            a, v = line.split(",")
            args.append(parse_real(a))
            vals.append(parse_real(v))
    return MonotoneFunction(args, vals, interp, head)
